"""Allow ``python -m lexent`` as an alias for the ``lexent`` script."""

from .cli import main

if __name__ == "__main__":
    raise SystemExit(main())
