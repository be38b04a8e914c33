"""gridflow command-line entry point: `python app.py <command> ...`."""

from gridflow.cli import main

if __name__ == "__main__":
    raise SystemExit(main())
