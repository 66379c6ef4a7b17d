from mtdlib.cli import main

raise SystemExit(main())
