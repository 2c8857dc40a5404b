"""
Hex Borel Toolkit: command-line entry point.

    hexborel analyze scenario.json
    hexborel reduce scenario.json
    hexborel trace scenario.json
    hexborel oracle scenario.json
    hexborel render scenario.json -o board.svg

Reports go to stdout as JSON with sorted keys; logs go to stderr. Exit code 0
on success, 2 when the scenario cannot be loaded or run.
"""

import argparse
import json
import logging
import sys
from pathlib import Path

from pydantic import ValidationError

from app.agents import ingestion_agent, orchestrator
from app.agents.ingestion_agent import ScenarioError
from app.config import configure_logging, get_settings

settings = get_settings()
logger = logging.getLogger("app.main")

EXIT_OK = 0
EXIT_SCENARIO = 2


def _parse_args(argv: list[str] | None = None) -> argparse.Namespace:
    parser = argparse.ArgumentParser(prog="hexborel", description=settings.APP_DESCRIPTION)
    parser.add_argument("--version", action="version", version=f"{settings.APP_NAME} {settings.APP_VERSION}")
    parser.add_argument("--seed", type=int, default=None, help="seed for random scenarios")
    parser.add_argument("--log-level", default=None, help=f"default {settings.LOG_LEVEL}")

    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in (
        ("analyze", "evaluate formulas and other requested analyses"),
        ("reduce", "descent statistics and plan checks of a reduction scenario"),
        ("trace", "edge traces and boundary cycles"),
        ("oracle", "window crossing oracle for each n"),
    ):
        cmd = sub.add_parser(name, help=text)
        cmd.add_argument("scenario", type=Path)
    render = sub.add_parser("render", help="draw the scenario window as SVG")
    render.add_argument("scenario", type=Path)
    render.add_argument("-o", "--output", type=Path, default=None, help="SVG path (default: stdout)")
    return parser.parse_args(argv)


def main(argv: list[str] | None = None) -> int:
    args = _parse_args(argv)
    configure_logging(args.log_level)

    try:
        scenario = ingestion_agent.load_scenario(args.scenario)
        if args.command == "render":
            svg = orchestrator.render_scenario(scenario, args.seed)
            if args.output is None:
                sys.stdout.write(svg)
            else:
                args.output.write_text(svg, encoding="utf-8")
                logger.info("wrote %s", args.output)
            return EXIT_OK
        report = orchestrator.run(scenario, args.command, args.seed)
    except FileNotFoundError as e:
        print(f"error: scenario not found: {e.filename}", file=sys.stderr)
        return EXIT_SCENARIO
    except OSError as e:
        print(f"error: {e.strerror}: {e.filename}", file=sys.stderr)
        return EXIT_SCENARIO
    except UnicodeDecodeError as e:
        print(f"error: scenario is not UTF-8: {e}", file=sys.stderr)
        return EXIT_SCENARIO
    except json.JSONDecodeError as e:
        print(f"error: malformed JSON: {e}", file=sys.stderr)
        return EXIT_SCENARIO
    except ValidationError as e:
        print(f"error: invalid scenario: {e.error_count()} validation error(s)\n{e}", file=sys.stderr)
        return EXIT_SCENARIO
    except ScenarioError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_SCENARIO

    json.dump(report, sys.stdout, sort_keys=True, indent=2, ensure_ascii=False)
    sys.stdout.write("\n")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
