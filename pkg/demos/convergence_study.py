"""
Empirical convergence order
===========================

Refine a uniform grid dyadically and watch the maximum error fall like
l_max ** min(r + 1, s + 1).
"""

import sys

from mshepard import franke, run_convergence, write_table

###############################################################################
# Bilinear blocks on grids of 9 to 65 nodes per side: order 2 is expected.
rows = run_convergence(franke, 1, 1, 2.0, [9, 17, 33, 65])
write_table(rows, sys.stdout)

###############################################################################
# Biquadratic blocks: order 3.
rows = run_convergence(franke, 2, 2, 4.0, [7, 13, 25, 49])
write_table(rows, sys.stdout)
