from stressinfill.api import create_app
from stressinfill.cli import cli

app = create_app()


if __name__ == "__main__":
    cli()
