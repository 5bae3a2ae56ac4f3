from graphdual.cli.main import main

raise SystemExit(main())
