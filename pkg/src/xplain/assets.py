"""Bundled maps.

``PAPER_MAP_TEXT`` is the 5x5 demo map: start at cell 20, destination at
cell 4, landmark at 12, crowded passage at {10, 11, 21}, obstacles at
{3, 5, 7, 14, 18}. Its geometry is tuned so that, under the default motion
model, the shortest route runs 20,15,10,11,12,13,8,9,4 (crossing the
crowded passage) and the safest route runs 20,15,16,17,12,13,8,9,4
(crossing none), both through the landmark.
"""

from __future__ import annotations

from .map_model import GridMap, parse_map

PAPER_MAP_ID = "paper-5x5"

PAPER_MAP_TEXT = """\
...#D
#.#..
rr*.#
...#.
Sr...
"""


def paper_map() -> GridMap:
    return parse_map(PAPER_MAP_TEXT, name=PAPER_MAP_ID)
