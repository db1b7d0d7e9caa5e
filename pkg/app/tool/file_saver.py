from pathlib import Path

import aiofiles

from app.exceptions import ToolError
from app.logger import logger
from app.tool.base import BaseTool


class FileSaver(BaseTool):
    name: str = "file_saver"
    description: str = """Save a rendered report or dataset to a local file.
Relative paths resolve against the current directory; missing parent directories are created.
"""
    parameters: dict = {
        "type": "object",
        "properties": {
            "content": {
                "type": "string",
                "description": "(required) The content to save to the file.",
            },
            "file_path": {
                "type": "string",
                "description": "(required) The path where the file should be saved, including filename and extension.",
            },
        },
        "required": ["content", "file_path"],
    }

    async def execute(self, content: str, file_path: str) -> str:
        """
        Save content to a file at the specified path.

        Args:
            content (str): The content to save to the file.
            file_path (str): The path where the file should be saved.

        Returns:
            str: The path written.
        """
        full_path = Path(file_path)
        try:
            full_path.parent.mkdir(parents=True, exist_ok=True)
            # newline="" keeps "\n" line endings on every platform
            async with aiofiles.open(full_path, "w", encoding="utf-8", newline="") as file:
                await file.write(content)
        except OSError as e:
            raise ToolError(f"Error saving file {full_path}: {e.strerror}")
        logger.info(f"Wrote {len(content)} characters to {full_path}")
        return str(full_path)
