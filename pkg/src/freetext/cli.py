"""The ``freetext serve`` command.

Every ServiceConfig field is settable by flag (``--kebab-name``) or
environment variable (``FREETEXT_UPPER_SNAKE``); flags win.
"""

from __future__ import annotations

import click

from .api import ServiceConfig, create_app


@click.group()
def main():
    """Open-ended question feedback service."""


@main.command()
@click.option("--port", type=int, default=8000, show_default=True,
              envvar="FREETEXT_PORT")
@click.option("--host", default="127.0.0.1", show_default=True,
              envvar="FREETEXT_HOST")
@click.option("--api-token", required=True, envvar="FREETEXT_API_TOKEN",
              help="Bearer token for instructor routes.")
@click.option("--storage-driver", type=click.Choice(["memory", "file"]),
              default="memory", show_default=True, envvar="FREETEXT_STORAGE_DRIVER")
@click.option("--storage-path", default=None, envvar="FREETEXT_STORAGE_PATH",
              help="Document path for the file driver.")
@click.option("--provider", type=click.Choice(["http", "scripted"]),
              default="http", show_default=True, envvar="FREETEXT_PROVIDER")
@click.option("--provider-endpoint", default="", envvar="FREETEXT_PROVIDER_ENDPOINT",
              help="Chat-completions endpoint URL.")
@click.option("--provider-key", default="", envvar="FREETEXT_PROVIDER_KEY",
              help="Provider secret key.")
@click.option("--provider-model", default="", envvar="FREETEXT_PROVIDER_MODEL",
              help="Model name for the provider.")
@click.option("--template-dir", default=None, envvar="FREETEXT_TEMPLATE_DIR",
              help="Directory of .prompt overrides.")
@click.option("--webapp-dir", default=None, envvar="FREETEXT_WEBAPP_DIR",
              help="Static frontend directory served at /app.")
@click.option("--persist-responses/--no-persist-responses", default=False,
              show_default=True, envvar="FREETEXT_PERSIST_RESPONSES")
@click.option("--response-char-cap", type=int, default=5000, show_default=True,
              envvar="FREETEXT_RESPONSE_CHAR_CAP")
@click.option("--max-rounds", type=int, default=3, show_default=True,
              envvar="FREETEXT_MAX_ROUNDS")
def serve(host, **kwargs):
    """Run the HTTP API."""
    import uvicorn

    config = ServiceConfig(**kwargs)
    uvicorn.run(create_app(config), host=host, port=config.port)


def entrypoint():
    main()


if __name__ == "__main__":
    entrypoint()
