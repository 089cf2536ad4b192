"""
Laurent modes of the tower
==========================

``l_N`` reads off one Laurent coefficient of ``B_(n+1)`` in its first argument.
The tower behaves like a highest-weight vector: positive modes kill it, ``l_0``
multiplies by alpha, negative modes act as the vector fields ``L_N``.
"""
from slecft import FamilyVector, apply_L, build_family, l_mode, mode_expand_check, stability_check

fam = build_family("a", height=4)
B = FamilyVector.of(fam)

print("l_1 B   :", [w.to_text() for w in l_mode(1, B).levels])
print("l_0 B   :", [w.factored() for w in l_mode(0, B).levels[:3]])
print("l_-1 B  :", l_mode(-1, B)[1].factored(), " vs  L_-1 B_1 =", apply_L(-1, fam[1]).factored())

# commuting l_1 through l_-1 gives 2 l_0, so at level 0 the answer is 2a
print("l_1 l_-1 B at level 0:", l_mode(1, l_mode(-1, B))[0].to_text())
print("l_2 l_-2 B at level 0:", l_mode(2, l_mode(-2, B))[0].to_text())

recs = mode_expand_check(fam, N_max=4)
print(f"{sum(r.ok for r in recs)}/{len(recs)} mode checks exact")
print(stability_check(fam, 2, [-1, -1])[0].to_json())
