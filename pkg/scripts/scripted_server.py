"""Run the service with a canned scripted provider, for UI work and demos.

Usage: python3 scripts/scripted_server.py [port]

Serves the built frontend from frontend/dist at /app when present. The
instructor token is "demo-token".
"""

import sys
from pathlib import Path

import uvicorn

from freetext.api import ServiceConfig, create_app
from freetext.gateway import ScriptTable, make_scripted_provider

FEEDBACK = (
    "HOLISTIC:\n"
    "Good start. Explain why the stone was created, not just what it is.\n"
    "QUOTES:\n"
    '- "stele" :: Precise terminology, well chosen.\n'
)

SCRIPT = ScriptTable.of(
    ("Student response:", FEEDBACK),
    ("diligent student", "It is a stone with the same text in three scripts."),
    ("unfairly penalized", "VERDICT: fair\nRATIONALE: the question covers the criteria"),
    ("numbered list", "1. Mentions the decree\n2. Mentions the three scripts"),
)


def main() -> None:
    port = int(sys.argv[1]) if len(sys.argv) > 1 else 8000
    webapp = Path(__file__).resolve().parents[1] / "frontend" / "dist"
    config = ServiceConfig(
        api_token="demo-token",
        port=port,
        webapp_dir=str(webapp) if webapp.is_dir() else None,
    )
    app = create_app(config, provider=make_scripted_provider(SCRIPT))
    uvicorn.run(app, host="127.0.0.1", port=port)


if __name__ == "__main__":
    main()
