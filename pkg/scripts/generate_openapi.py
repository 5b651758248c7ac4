#!/usr/bin/env python3
"""Regenerate docs/openapi.json from the live FastAPI app."""

from __future__ import annotations

import json
import tempfile
from pathlib import Path

from xplain.service import create_app

DOCS = Path(__file__).resolve().parent.parent / "docs"


def main() -> None:
    with tempfile.TemporaryDirectory() as scratch:
        app = create_app(data_dir=scratch)
        document = app.openapi()
    DOCS.mkdir(exist_ok=True)
    target = DOCS / "openapi.json"
    target.write_text(json.dumps(document, indent=2) + "\n", encoding="utf-8")
    print(f"wrote {target}")


if __name__ == "__main__":
    main()
