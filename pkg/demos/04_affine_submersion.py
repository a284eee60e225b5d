"""
The transport map as an affine submersion
=========================================

Differentiate the horizontal lift of a base vector field along a straight
line in path space and compare with the covariant derivative on the base.
With the natural torsion-free connection the two agree; on the non-symmetric
space SU(3)/T^2 the canonical connection visibly does not. On the symmetric
spaces ``[p, p]`` lies in ``k``, so the two connections coincide there.
"""
import numpy as np

from ptmap import catalog
from ptmap.base import Chart, PolynomialField
from ptmap.lie import ConnectionKind
from ptmap.transport import check_affine_submersion

rng = np.random.default_rng(11)
for name in ("su2", "sl2r", "su3"):
    entry = catalog.load(name)
    chart, pair = Chart.from_entry(entry), entry.pair
    X = pair.p_part(rng.standard_normal(pair.algebra.dim))
    X /= pair.algebra.norm(X)
    Z = PolynomialField.random(pair, rng)
    for kind in ConnectionKind:
        rep = check_affine_submersion(chart, Z, X, h=1e-4, kind=kind)
        print(f"{name:5s} {kind.value:22s} residual {rep.residual:.3e}")
