"""
List parser for command-line selections
Parses seed and scenario lists such as "0-9", "0,2,5" or "33,35-37"
"""

import re
from typing import List, Tuple

from utils.logger import get_logger

logger = get_logger()

_PART = re.compile(r'^(\d+)(?:-(\d+))?$')


class RangeParser:
    """
    Parser for integer lists

    Supports:
    - Single value: 7
    - Inclusive range: 0-9
    - Mixed: 33,35-37
    """

    @staticmethod
    def parse_value(s: str) -> int:
        """
        Parse one non-negative integer

        Raises:
            ValueError: If the text is not a number
        """
        s = s.strip()
        if not s.isdigit():
            raise ValueError(f"'{s}' is not a valid non-negative integer")
        return int(s, 10)

    @staticmethod
    def parse_range(range_str: str) -> List[Tuple[int, int]]:
        """
        Parse a comma separated list of values and ranges

        Returns:
            List of (start, end) tuples, end inclusive

        Examples:
            "3" -> [(3, 3)]
            "0-9" -> [(0, 9)]
            "33,35-37" -> [(33, 33), (35, 37)]
        """
        result = []
        for part in (p.strip() for p in range_str.split(',')):
            if not part:
                continue
            match = _PART.match(part)
            if not match:
                raise ValueError(f"Invalid range format: '{part}'")
            start_str, end_str = match.groups()
            start = int(start_str)
            end = int(end_str) if end_str else start
            if start > end:
                raise ValueError(f"Invalid range: start ({start}) > end ({end})")
            result.append((start, end))

        if not result:
            raise ValueError(f"Empty list: '{range_str}'")
        logger.debug(f"Parsed range '{range_str}' -> {result}")
        return result

    @staticmethod
    def expand_ranges(ranges: List[Tuple[int, int]]) -> List[int]:
        """
        Expand ranges into values, keeping first-seen order

        Duplicates are dropped with a warning.
        """
        seen = set()
        result = []
        duplicates = []
        for start, end in ranges:
            for value in range(start, end + 1):
                if value in seen:
                    duplicates.append(value)
                    continue
                seen.add(value)
                result.append(value)
        if duplicates:
            logger.warning(f"Duplicate entries ignored: {sorted(set(duplicates))}")
        return result


def parse_int_list(text: str) -> List[int]:
    """'0-2,5' -> [0, 1, 2, 5]"""
    return RangeParser.expand_ranges(RangeParser.parse_range(text))
