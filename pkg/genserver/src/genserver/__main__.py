"""Entry point: `genserver [--config file] [--host H] [--port N] ...`.

Precedence: command-line flags > GENSERVER_* env vars > config file >
built-in defaults. A checkpoint that fails to load aborts startup with a
nonzero exit instead of serving a broken /generate.
"""

import argparse
import dataclasses
import sys

import uvicorn

from .app import create_app
from .config import ServerConfig, apply_env


def build_config(argv=None) -> ServerConfig:
    p = argparse.ArgumentParser(prog="genserver")
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--checkpoint", help="model path, or 'stub'")
    p.add_argument("--device")
    p.add_argument("--host")
    p.add_argument("--port", type=int)
    p.add_argument("--max-concurrent", dest="max_concurrent", type=int)
    args = p.parse_args(argv)

    cfg = ServerConfig.from_file(args.config) if args.config else ServerConfig()
    cfg = apply_env(cfg)
    overrides = {
        f: v
        for f, v in vars(args).items()
        if f != "config" and v is not None
    }
    return dataclasses.replace(cfg, **overrides) if overrides else cfg


def main(argv=None) -> int:
    try:
        cfg = build_config(argv)
        app = create_app(cfg)
    except Exception as exc:
        print(f"genserver: startup failed: {exc}", file=sys.stderr)
        return 1
    uvicorn.run(app, host=cfg.host, port=cfg.port, log_level="info")
    return 0


if __name__ == "__main__":
    sys.exit(main())
