from .http import main

raise SystemExit(main())
