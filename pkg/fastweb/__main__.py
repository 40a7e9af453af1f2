"""``python -m fastweb``."""

from fastweb.cli import main

raise SystemExit(main())
