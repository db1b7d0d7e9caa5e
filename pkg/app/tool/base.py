import asyncio
from abc import ABC, abstractmethod
from typing import Any, Dict, Optional

from pydantic import BaseModel, Field

from app.cli import Report, RunConfig, resolve_run_config
from app.logger import logger


class BaseTool(ABC, BaseModel):
    name: str
    description: str
    parameters: Optional[dict] = None

    class Config:
        arbitrary_types_allowed = True

    async def __call__(self, **kwargs) -> Any:
        """Execute the tool with given parameters."""
        return await self.execute(**kwargs)

    @abstractmethod
    async def execute(self, **kwargs) -> Any:
        """Execute the tool with given parameters."""

    def to_param(self) -> Dict:
        """Describe the tool as a name, description and JSON-schema parameters."""
        return {
            "name": self.name,
            "description": self.description,
            "parameters": self.parameters,
        }


class ToolResult(BaseModel):
    """Represents the result of a tool execution."""

    output: Any = Field(default=None)
    error: Optional[str] = Field(default=None)
    path: Optional[str] = Field(default=None, description="Where the report was written")
    passed: Optional[bool] = Field(
        default=None, description="Verdict of a verification command"
    )

    class Config:
        arbitrary_types_allowed = True


class ToolFailure(ToolResult):
    """A ToolResult that represents a failure."""


class CommandTool(BaseTool):
    """A subcommand: resolve its config, compute off the event loop, write the report."""

    writes_report: bool = True

    async def execute(self, **kwargs) -> ToolResult:
        run_config = resolve_run_config(self.name, kwargs)
        logger.debug(f"{self.name}: {run_config.report_dict()}")
        loop = asyncio.get_running_loop()
        report = await loop.run_in_executor(None, self.run, run_config)

        # imported here: file_saver depends on this module
        from app.tool.file_saver import FileSaver

        saver = FileSaver()
        for path, content in report.files.items():
            await saver.execute(content=content, file_path=path)

        text = report.render(run_config.format)
        if self.writes_report and run_config.output:
            await saver.execute(content=text, file_path=run_config.output)
            return ToolResult(output=None, path=run_config.output, passed=report.passed)
        return ToolResult(output=text, passed=report.passed)

    @abstractmethod
    def run(self, run_config: RunConfig) -> Report:
        """Blocking computation of the command's report."""
