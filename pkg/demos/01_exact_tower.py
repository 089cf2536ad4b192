"""
The correlation tower and where kappa = 8/3, alpha = 5/8 come from
===================================================================

Everything here is exact rational-function arithmetic.
"""
from fractions import Fraction

from slecft import build_family, derive_constants, evolution_defect

# B_0 = 1, B_1 = a/x1^2, and each further level from the Ward recursion.
# The fresh argument is always x1; older arguments shift up by one.
fam = build_family("a", height=3)
for n, b in enumerate(fam.levels):
    print(f"B_{n} =", b.factored())

# The evolution operator applied to the tower, with kappa and alpha left symbolic.
defects = evolution_defect(fam, "k", 2)
print("level 1 defect:", defects[1].factored())

# Level 1 forces k = 8/3.  Plug that in and level 2 forces a = 5/8.
print("level 2 defect at k=8/3:", evolution_defect(fam, Fraction(8, 3), 2)[2].factored())

res = derive_constants()
print("kappa =", res.kappa, " alpha =", res.alpha)

# With both constants fixed every level is annihilated exactly.
sle = build_family(res.alpha, height=4)
print([d.is_zero() for d in evolution_defect(sle, res.kappa, 2)])
