"""
gpbound timing benchmarks.

Reproduces the two timing tables: dense instances with n in {3, 4, 5}, and
sparse instances with n up to 40 and 2d up to 60.
"""
