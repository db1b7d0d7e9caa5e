# Python version check: 3.11-3.13
import sys
from typing import Optional, Sequence


SUPPORTED_PYTHON = ((3, 11), (3, 13))


def unsupported_python(version_info: Sequence[int] = sys.version_info) -> Optional[str]:
    """Warning text for an interpreter outside the supported minor versions."""
    lowest, highest = SUPPORTED_PYTHON
    if lowest <= tuple(version_info[:2]) <= highest:
        return None
    return "Warning: Unsupported Python version {ver}, please use 3.11-3.13".format(
        ver=".".join(map(str, version_info))
    )


_warning = unsupported_python()
if _warning:
    # stdout carries reports only
    print(_warning, file=sys.stderr)
