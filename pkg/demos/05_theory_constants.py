"""Print every constant and condition the analysis provides for a config.

This is the same report the ``analyze`` subcommand prints.
"""

import warnings

from bitrack import preset, theory_report
from bitrack.analysis import format_table

warnings.simplefilter("ignore")
for name in ("paper-crs", "paper-brs"):
    print(f"== {name}")
    print(format_table(theory_report(preset(name))))
    print()
