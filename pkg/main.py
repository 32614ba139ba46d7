"""Main module to run scenarios and verify snapshots."""
from cli.commands import app


def main():
    """Entry point of the command-line tool."""
    app()


if __name__ == "__main__":
    main()
