import io
import math

import pytest

from nlaqkd.csvout import format_value, write_csv
from nlaqkd.types import RateStatus


@pytest.mark.parametrize(
    "value,expected",
    [
        (None, ""),
        (math.nan, ""),
        (0.1349, "0.1349"),
        (1 / 3, "0.333333333"),
        (1.5e-12, "1.5e-12"),
        (3, "3"),
        (True, "true"),
        (RateStatus.UNPHYSICAL_NLA_MAPPING, "UnphysicalNlaMapping"),
        ("correlation", "correlation"),
    ],
)
def test_format_value(value, expected):
    assert format_value(value) == expected


def test_write_csv():
    buf = io.StringIO()
    rows = [[0.0, 0.5, RateStatus.PHYSICAL], [1.0, None, "x,y"]]
    write_csv(buf, ["loss_db", "rate", "status"], rows)
    assert buf.getvalue() == 'loss_db,rate,status\n0,0.5,Physical\n1,,"x,y"\n'
