from app.tool.base import BaseTool, CommandTool, ToolFailure, ToolResult
from app.tool.bound import BoundTool, CompareTool, SweepTool, ThresholdTool
from app.tool.file_saver import FileSaver
from app.tool.harness import (
    SurvivalTool,
    SynthTool,
    ValidateOnlineTool,
    ValidateTool,
)
from app.tool.infer import InferAlphaTool, InferMinTool
from app.tool.tool_collection import ToolCollection
from app.tool.verify import MonteCarloVerifyTool


def command_tools() -> ToolCollection:
    """Every subcommand, in help order."""
    return ToolCollection(
        BoundTool(),
        ThresholdTool(),
        MonteCarloVerifyTool(),
        InferAlphaTool(),
        InferMinTool(),
        ValidateTool(),
        ValidateOnlineTool(),
        SurvivalTool(),
        SynthTool(),
        SweepTool(),
        CompareTool(),
    )


__all__ = [
    "BaseTool",
    "CommandTool",
    "ToolResult",
    "ToolFailure",
    "FileSaver",
    "ToolCollection",
    "command_tools",
]
