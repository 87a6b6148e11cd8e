"""Biography-reasoning dataset, schedule and evaluation toolkit."""

import os
import pathlib

_data = pathlib.Path(__file__).with_name("data")
if _data.is_dir():
    os.environ.setdefault("BIOPATCH_DATA_DIR", str(_data))

from ._core import (  # noqa: E402
    BiopatchError,
    __version__,
    anniversary,
    ascore,
    context_similarity,
    country_of,
    exact_match,
    field_of,
    first_last,
    mscore,
    odd_letters,
    parity,
    parse_final_answer,
    run,
    tokenize,
    validate_attdump,
    write_attdump,
    year_diff,
)


def main(argv=None):
    import sys

    code, out, err = run(list(sys.argv[1:] if argv is None else argv))
    sys.stdout.write(out)
    sys.stderr.write(err)
    return code
