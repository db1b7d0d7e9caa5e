import argparse
import asyncio
import sys
from typing import Callable, List, Optional

from app.logger import logger
from app.tool import ToolCollection, ToolFailure, command_tools


EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_INPUT_ERROR = 2

_SCALARS = {"integer": int, "number": float, "string": str}


def _list_of(kind: Callable) -> Callable[[str], List]:
    def parse(text: str) -> List:
        try:
            return [kind(part) for part in text.split(",") if part.strip()]
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected comma-separated values, got {text!r}")

    return parse


def _add_argument(parser: argparse.ArgumentParser, name: str, schema: dict) -> None:
    flag = "--" + name.replace("_", "-")
    kwargs = {"dest": name, "default": None, "help": schema.get("description")}
    kind = schema.get("type")
    if kind == "boolean":
        kwargs["action"] = argparse.BooleanOptionalAction
    elif kind == "array":
        kwargs["type"] = _list_of(_SCALARS[schema["items"]["type"]])
        kwargs["metavar"] = "A,B,..."
    else:
        kwargs["type"] = _SCALARS[kind]
        if "enum" in schema:
            kwargs["choices"] = schema["enum"]
    parser.add_argument(flag, **kwargs)


def build_parser(tools: ToolCollection) -> argparse.ArgumentParser:
    """One subcommand per tool, flags generated from its parameter schema."""
    parser = argparse.ArgumentParser(
        prog="ratebound",
        description="Minimum number of ratings for reliable majority and average aggregation.",
    )
    commands = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    for tool in tools:
        summary = tool.description.splitlines()[0]
        sub = commands.add_parser(
            tool.name,
            help=summary,
            description=tool.description,
            formatter_class=argparse.RawDescriptionHelpFormatter,
        )
        for name, schema in tool.parameters["properties"].items():
            _add_argument(sub, name, schema)
    return parser


async def run(argv: Optional[List[str]] = None) -> int:
    """Dispatch one command and print its report; returns the exit status."""
    tools = command_tools()
    args = build_parser(tools).parse_args(argv)
    tool_input = {
        key: value
        for key, value in vars(args).items()
        if key != "command" and value is not None
    }
    result = await tools.execute(name=args.command, tool_input=tool_input)
    if isinstance(result, ToolFailure):
        print(f"error: {result.error}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    if result.output:
        sys.stdout.write(result.output)
    elif result.path:
        logger.info(f"Report written to {result.path}")
    if result.passed is False:
        logger.warning(f"{args.command} check failed")
        return EXIT_CHECK_FAILED
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> None:
    try:
        sys.exit(asyncio.run(run(argv)))
    except KeyboardInterrupt:
        logger.warning("Operation interrupted.")
        sys.exit(130)


if __name__ == "__main__":
    main()
