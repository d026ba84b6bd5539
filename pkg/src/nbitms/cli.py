"""Command line entry points.

    nbitms run --config engine.json      serve the engine + HTTP API
    nbitms check <object_id> --config f  one-shot check, result on stdout
    nbitms sim --fleet fleet.json        serve the simulated fleet over UDP
    nbitms eval --profiles profiles.json print the tool-comparison report
    nbitms validate --config engine.json validate a config, listing problems

Exit codes: 0 success, 1 runtime error, 2 configuration error.
"""

from __future__ import annotations

import argparse
import json
import logging
import signal
import sys

from nbitms.errors import ConfigError, NbitmsError
from nbitms.evaluation import compare_tools, load_profiles, render_report

logger = logging.getLogger("nbitms")

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_CONFIG = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nbitms", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run the engine and serve the HTTP API")
    run.add_argument("--config", required=True)
    run.add_argument("--tick", type=float, default=0.5, help="scheduler tick in seconds")

    check = sub.add_parser("check", help="run one check and print the result")
    check.add_argument("object_id")
    check.add_argument("--config", required=True)

    sim = sub.add_parser("sim", help="serve a simulated agent fleet over UDP")
    sim.add_argument("--fleet", required=True)
    sim.add_argument("--host", default="127.0.0.1")

    evalp = sub.add_parser("eval", help="compare tool profiles")
    evalp.add_argument("--profiles", required=True)
    evalp.add_argument("--window", default=None, help="window as <start>:<end>")
    evalp.add_argument("--json", action="store_true", help="emit the report as JSON")

    validate = sub.add_parser("validate", help="validate an engine config")
    validate.add_argument("--config", required=True)

    return parser


def cmd_run(args) -> int:
    import uvicorn

    from nbitms.gateway.api import create_app
    from nbitms.gateway.config import build_engine, load_config
    from nbitms.gateway.persistence import (
        load_state,
        persist_engine_state,
        restore_engine_state,
    )

    config = load_config(args.config)
    engine = build_engine(config)

    # uvicorn re-raises SIGTERM after its graceful shutdown with the previous
    # handler restored; turn that into SystemExit so state still persists.
    def _graceful_term(_signum, _frame):
        raise SystemExit(0)

    signal.signal(signal.SIGTERM, _graceful_term)

    if config.state_file:
        try:
            persisted = load_state(config.state_file)
        except NbitmsError as exc:
            logger.warning("ignoring unreadable state file: %s", exc)
            persisted = None
        if persisted is not None:
            engine.start()
            restore_engine_state(engine, persisted)
            logger.info("restored %d records, %d alarms", len(persisted.records), len(persisted.alarms))

    engine.identify_devices()
    engine.start_background(tick_s=args.tick)
    app = create_app(engine, eval_profiles_path=config.eval_profiles_path,
                     capacities=config.capacities, ui_dir=config.ui_path)
    if config.ui_path:
        logger.info("serving operator console from %s", config.ui_path)

    host, _, port = config.listen.partition(":")
    try:
        uvicorn.run(app, host=host or "127.0.0.1", port=int(port) if port else 8080,
                    log_level="warning")
    finally:
        engine.shutdown()
        if config.state_file:
            persist_engine_state(engine, config.state_file)
            logger.info("state persisted to %s", config.state_file)
    return EXIT_OK


def cmd_check(args) -> int:
    from nbitms.gateway.config import build_engine, load_config

    config = load_config(args.config)
    engine = build_engine(config)
    if args.object_id not in engine.objects:
        print(f"unknown object {args.object_id!r}", file=sys.stderr)
        return EXIT_CONFIG
    obj = engine.objects[args.object_id]
    outcome = engine.check_runner.run_check(obj)
    print(f"{outcome.status.value}: {outcome.output}")
    engine.shutdown()
    return EXIT_OK


def cmd_sim(args) -> int:
    import time

    from nbitms.simfleet import fleet_from_config

    try:
        doc = json.loads(open(args.fleet, encoding="utf-8").read())
    except (OSError, json.JSONDecodeError) as exc:
        print(f"cannot read fleet config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    fleet = fleet_from_config(doc)
    ports = getattr(fleet, "configured_ports", {})
    servers = fleet.start_udp(host=args.host, ports=ports)
    for device_id in fleet.device_ids():
        server = servers[device_id]
        print(f"{device_id} listening on {args.host}:{server.port}")
    try:
        while True:
            time.sleep(3600)
    except KeyboardInterrupt:
        pass
    finally:
        fleet.stop()
    return EXIT_OK


def cmd_eval(args) -> int:
    window = (0.0, 0.0)
    if args.window:
        try:
            start_text, _, end_text = args.window.partition(":")
            window = (float(start_text), float(end_text))
        except ValueError:
            print(f"malformed --window {args.window!r}, expected <start>:<end>", file=sys.stderr)
            return EXIT_CONFIG
    profiles = load_profiles(args.profiles)
    report = compare_tools(profiles, window=window)
    if args.json:
        print(json.dumps(report.to_json(), indent=2, sort_keys=True))
    else:
        print(render_report(report))
    return EXIT_OK


def cmd_validate(args) -> int:
    from nbitms.gateway.config import load_config

    config = load_config(args.config)
    print(f"config ok: {len(config.objects)} objects, "
          f"{len(config.plugin_registry.names())} plugins, "
          f"{len(config.mib_registry)} MIB entries")
    return EXIT_OK


HANDLERS = {
    "run": cmd_run,
    "check": cmd_check,
    "sim": cmd_sim,
    "eval": cmd_eval,
    "validate": cmd_validate,
}


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(levelname)s %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return HANDLERS[args.command](args)
    except KeyboardInterrupt:
        return EXIT_OK
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        for problem in exc.problems:
            if problem != str(exc):
                print(f"  - {problem}", file=sys.stderr)
        return EXIT_CONFIG
    except NbitmsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
