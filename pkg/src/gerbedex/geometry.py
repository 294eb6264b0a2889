"""Chart atlases with composite Gauss-Legendre quadrature and bump partitions
of unity, matrix-valued differential forms on grids, and module connections.

Conventions:
  - Each chart is a coordinate box with an orientation sign; its quadrature
    grid is a product Gauss-Legendre rule of the configured order on each of
    `panels` equal subdivisions per axis (composite rule).
  - The partition of unity is built from bump(t) = exp(1 - 1/(1 - t^2))
    applied per axis with t the box-centered normalized coordinate, multiplied
    over axes, then normalized pointwise across charts.
  - Grid differentiation is barycentric-Lagrange spectral differentiation per
    panel (exact on each panel's polynomial space, one-sided at panel edges).
  - Form components are stored as true chart-coordinate coefficients on
    strictly increasing index tuples; orientation signs enter only in
    integrate_top.
  - Connection 1-forms A are anti-Hermitian; gluing across charts follows
    A_a = phi A_b phi^-1 - (d phi) phi^-1 and curvature is F = dA + A ^ A.
"""
from itertools import combinations

import numpy as np

from .gerbe import tensor_modules

__all__ = [
    "bump",
    "composite_gauss_legendre",
    "Chart",
    "OverlapMap",
    "ChartAtlas",
    "FormField",
    "ModuleConnection",
    "curvature",
    "connection_difference",
    "tensor_connection",
    "integrate_top",
]


def bump(t):
    """Smooth compactly supported bump: exp(1 - 1/(1-t^2)) inside |t| < 1."""
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    inside = np.abs(t) < 1.0
    ti = t[inside]
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - ti * ti))
    return out


def log_bump(t):
    """log of bump(t): 1 - 1/(1-t^2) inside the support, -inf outside.

    Working in logs keeps the pointwise-normalized partition of unity exact
    even where the bump itself underflows near box edges.
    """
    t = np.asarray(t, dtype=float)
    out = np.full(t.shape, -np.inf)
    inside = np.abs(t) < 1.0
    ti = t[inside]
    out[inside] = 1.0 - 1.0 / (1.0 - ti * ti)
    return out


def _barycentric_weights(nodes):
    n = len(nodes)
    weights = np.empty(n)
    for i in range(n):
        weights[i] = 1.0 / np.prod(nodes[i] - np.delete(nodes, i))
    return weights / np.max(np.abs(weights))


def _diff_matrix(nodes, bary):
    n = len(nodes)
    diff = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            if i != j:
                diff[i, j] = (bary[j] / bary[i]) / (nodes[i] - nodes[j])
    np.fill_diagonal(diff, -np.sum(diff, axis=1))
    return diff


def composite_gauss_legendre(lo, hi, order, panels):
    """Nodes and weights of the order-`order` GL rule on `panels` equal panels."""
    if order < 1 or panels < 1:
        raise ValueError("order and panels must be positive")
    ref_nodes, ref_weights = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(lo, hi, panels + 1)
    half = 0.5 * (edges[1] - edges[0])
    mids = 0.5 * (edges[:-1] + edges[1:])
    nodes = (mids[:, None] + half * ref_nodes[None, :]).ravel()
    weights = np.tile(half * ref_weights, panels)
    return nodes, weights


class GridAxis:
    """One chart axis: composite GL nodes, weights, and spectral differentiation."""

    def __init__(self, lo, hi, order, panels):
        if not hi > lo:
            raise ValueError("axis requires hi > lo")
        self.lo = float(lo)
        self.hi = float(hi)
        self.order = int(order)
        self.panels = int(panels)
        self.center = 0.5 * (self.lo + self.hi)
        self.half = 0.5 * (self.hi - self.lo)
        self.nodes, self.weights = composite_gauss_legendre(
            self.lo, self.hi, self.order, self.panels)
        self.panel_edges = np.linspace(self.lo, self.hi, self.panels + 1)
        ref_nodes, _ = np.polynomial.legendre.leggauss(self.order)
        self.bary = _barycentric_weights(ref_nodes)
        panel_half = 0.5 * (self.panel_edges[1] - self.panel_edges[0])
        ref_diff = _diff_matrix(ref_nodes, self.bary) / panel_half
        self.diff = np.kron(np.eye(self.panels), ref_diff)


class Chart:
    """Coordinate box with an orientation sign and a composite GL grid."""

    def __init__(self, name, lo, hi, orientation, order=32, panels=6):
        if orientation not in (1, -1):
            raise ValueError("orientation must be +1 or -1")
        lo = tuple(float(v) for v in lo)
        hi = tuple(float(v) for v in hi)
        if len(lo) != len(hi) or not lo:
            raise ValueError("lo and hi must be equal-length nonempty tuples")
        self.name = str(name)
        self.lo = lo
        self.hi = hi
        self.orientation = int(orientation)
        self.order = int(order)
        self.panels = int(panels)
        self.dim = len(lo)
        self.axes = [GridAxis(a, b, order, panels) for a, b in zip(lo, hi)]
        self.shape = tuple(len(ax.nodes) for ax in self.axes)
        self._coords = None
        self._weights = None
        self._grid_bump = None

    def coords(self):
        """Meshgrid coordinate arrays (ij indexing), one per axis."""
        if self._coords is None:
            self._coords = np.meshgrid(*(ax.nodes for ax in self.axes),
                                       indexing="ij")
        return self._coords

    def node_weights(self):
        """Product quadrature weight at every grid node."""
        if self._weights is None:
            total = self.axes[0].weights
            for ax in self.axes[1:]:
                total = np.multiply.outer(total, ax.weights)
            self._weights = total
        return self._weights

    def bump_values(self, points=None):
        """Product bump scaled to the box, on the grid or at given points."""
        if points is None:
            if self._grid_bump is None:
                total = bump((self.axes[0].nodes - self.axes[0].center)
                             / self.axes[0].half)
                for ax in self.axes[1:]:
                    total = np.multiply.outer(
                        total, bump((ax.nodes - ax.center) / ax.half))
                self._grid_bump = total
            return self._grid_bump
        pts = np.asarray(points, dtype=float)
        out = np.ones(pts.shape[:-1])
        for k, ax in enumerate(self.axes):
            out = out * bump((pts[..., k] - ax.center) / ax.half)
        return out

    def log_bump_values(self, points=None):
        """Sum of per-axis log-bumps, on the grid or at given points."""
        if points is None:
            total = log_bump((self.axes[0].nodes - self.axes[0].center)
                             / self.axes[0].half)
            for ax in self.axes[1:]:
                total = np.add.outer(
                    total, log_bump((ax.nodes - ax.center) / ax.half))
            return total
        pts = np.asarray(points, dtype=float)
        out = np.zeros(pts.shape[:-1])
        for k, ax in enumerate(self.axes):
            out = out + log_bump((pts[..., k] - ax.center) / ax.half)
        return out

    def contains(self, points, tol=1e-9):
        pts = np.asarray(points, dtype=float)
        inside = np.ones(pts.shape[:-1], dtype=bool)
        for k, ax in enumerate(self.axes):
            inside &= (pts[..., k] >= ax.lo - tol) & (pts[..., k] <= ax.hi + tol)
        return inside

    def differentiate(self, values, axis):
        """Spectral derivative of grid data along one axis (per panel)."""
        values = np.asarray(values)
        moved = np.tensordot(self.axes[axis].diff, values, axes=(1, axis))
        return np.moveaxis(moved, 0, axis)

    def interpolate(self, values, points, chunk=256):
        """Barycentric tensor interpolation of grid data at arbitrary points."""
        values = np.asarray(values)
        pts = np.asarray(points, dtype=float)
        if pts.ndim == 1:
            pts = pts[None, :]
        if pts.shape[-1] != self.dim:
            raise ValueError("points must have one coordinate per axis")
        trail = values.shape[self.dim:]
        out = np.empty((pts.shape[0],) + trail, dtype=values.dtype)
        for start in range(0, pts.shape[0], chunk):
            block = slice(start, min(start + chunk, pts.shape[0]))
            out[block] = self._interp_block(values, pts[block])
        return out

    def _interp_block(self, values, pts):
        basis = []
        starts = []
        for k, ax in enumerate(self.axes):
            x = pts[:, k]
            panel = np.clip(np.searchsorted(ax.panel_edges, x, side="right") - 1,
                            0, ax.panels - 1)
            start = panel * ax.order
            local = ax.nodes[start[:, None] + np.arange(ax.order)[None, :]]
            diff = x[:, None] - local
            hit = np.abs(diff) < 1e-14
            terms = np.where(hit, 0.0, ax.bary[None, :] / np.where(hit, 1.0, diff))
            rows = hit.any(axis=1)
            if rows.any():
                terms[rows] = hit[rows].astype(float)
            basis.append(terms / np.sum(terms, axis=1, keepdims=True))
            starts.append(start)
        if self.dim == 1:
            idx = starts[0][:, None] + np.arange(self.axes[0].order)[None, :]
            return np.einsum("ma,ma...->m...", basis[0], values[idx])
        if self.dim == 2:
            o0 = self.axes[0].order
            o1 = self.axes[1].order
            i0 = (starts[0][:, None] + np.arange(o0)[None, :])[:, :, None]
            i1 = (starts[1][:, None] + np.arange(o1)[None, :])[:, None, :]
            patch = values[i0, i1]
            return np.einsum("ma,mb,mab...->m...", basis[0], basis[1], patch)
        raise NotImplementedError("interpolation implemented for 1 and 2 axes")


class OverlapMap:
    """Transition a -> b: coordinate map, its Jacobian, and a validity mask.

    `mapper(*coords)` returns b-chart coordinates of points given in a-chart
    coordinates; `jacobian(*coords)` returns (..., dim, dim) arrays with
    jac[..., i, j] = d(b-coord i)/d(a-coord j); `mask(*coords)` flags a-points
    lying in the overlap.
    """

    def __init__(self, mapper, jacobian, mask):
        self.mapper = mapper
        self.jacobian = jacobian
        self.mask = mask


class ChartAtlas:
    """Charts, overlap maps, and the normalized bump partition of unity."""

    def __init__(self, name, dim, charts, overlaps, pou_tol=1e-12):
        self.name = str(name)
        self.dim = int(dim)
        self.charts = {}
        for chart in charts:
            if chart.name in self.charts:
                raise ValueError(f"duplicate chart name {chart.name!r}")
            if chart.dim != self.dim:
                raise ValueError(f"chart {chart.name!r} has dimension {chart.dim}")
            self.charts[chart.name] = chart
        self.overlaps = {}
        for key, overlap in overlaps.items():
            a, b = key
            if a not in self.charts or b not in self.charts or a == b:
                raise ValueError(f"overlap key {key!r} does not name two charts")
            if not isinstance(overlap, OverlapMap):
                raise ValueError("overlap values must be OverlapMap instances")
            self.overlaps[(a, b)] = overlap
        self.pou = {}
        for cname, chart in self.charts.items():
            own = chart.log_bump_values()
            self.pou[cname] = self._normalized(cname, own, chart.coords())
        self._validate_pou(pou_tol)

    def _foreign_log_bumps(self, cname, coord_arrays):
        """Per-overlap log-bumps of the other charts at cname-coordinate points."""
        logs = []
        for (a, b), overlap in self.overlaps.items():
            if a != cname:
                continue
            inside = np.asarray(overlap.mask(*coord_arrays), dtype=bool)
            contrib = np.full(np.shape(coord_arrays[0]), -np.inf)
            if inside.any():
                mapped = overlap.mapper(*(c[inside] for c in coord_arrays))
                pts = np.stack([np.asarray(m, dtype=float) for m in mapped],
                               axis=-1)
                contrib[inside] = self.charts[b].log_bump_values(pts)
            logs.append(contrib)
        return logs

    def _normalized(self, cname, own_log, coord_arrays):
        """Pointwise-normalized share of cname's bump among all charts' bumps.

        Softmax in log space: exact ratios even where bumps underflow.
        """
        logs = [own_log] + self._foreign_log_bumps(cname, coord_arrays)
        stack = np.stack(logs, axis=0)
        peak = np.max(stack, axis=0)
        covered = np.isfinite(peak)
        out = np.zeros(own_log.shape)
        if covered.any():
            terms = np.exp(stack[:, covered] - peak[covered])
            out[covered] = terms[0] / np.sum(terms, axis=0)
        return out

    def _rho_at(self, cname, coord_arrays):
        """Partition value of chart cname at points given in its coordinates."""
        pts = np.stack([np.asarray(c, dtype=float) for c in coord_arrays], axis=-1)
        own = self.charts[cname].log_bump_values(pts)
        return self._normalized(cname, own, coord_arrays)

    def _validate_pou(self, tol):
        worst = 0.0
        for cname, chart in self.charts.items():
            coords = chart.coords()
            total = self.pou[cname].copy()
            for (a, b), overlap in self.overlaps.items():
                if a != cname:
                    continue
                inside = np.asarray(overlap.mask(*coords), dtype=bool)
                if not inside.any():
                    continue
                mapped = overlap.mapper(*(c[inside] for c in coords))
                total[inside] += self._rho_at(b, mapped)
            worst = max(worst, float(np.max(np.abs(total - 1.0))))
        if worst > tol:
            raise ValueError(
                f"partition of unity sums to 1 only within {worst:.3e}; "
                "check overlap maps and masks for consistency")


def _form_keys(dim, degree):
    return tuple(combinations(range(dim), degree))


class FormField:
    """Degree-p form as chart-coefficient arrays on strictly increasing keys."""

    def __init__(self, atlas, degree, comps, rank=None):
        if not 0 <= degree <= atlas.dim:
            raise ValueError(f"degree must lie in 0..{atlas.dim}")
        if rank is not None and int(rank) < 1:
            raise ValueError("rank must be a positive integer or None")
        self.atlas = atlas
        self.degree = int(degree)
        self.rank = None if rank is None else int(rank)
        keys = _form_keys(atlas.dim, self.degree)
        trail = () if self.rank is None else (self.rank, self.rank)
        store = {}
        for cname, chart in atlas.charts.items():
            if cname not in comps:
                raise ValueError(f"missing components for chart {cname!r}")
            supplied = comps[cname]
            unknown = set(supplied) - set(keys)
            if unknown:
                raise ValueError(f"unexpected component keys {sorted(unknown)}")
            chart_comps = {}
            for key in keys:
                if key not in supplied:
                    raise ValueError(f"missing component {key} on chart {cname!r}")
                arr = np.asarray(supplied[key])
                if arr.shape != chart.shape + trail:
                    raise ValueError(
                        f"component {key} on chart {cname!r} has shape "
                        f"{arr.shape}, expected {chart.shape + trail}")
                chart_comps[key] = arr
            store[cname] = chart_comps
        self.comps = store

    @classmethod
    def sample(cls, atlas, degree, specs, rank=None):
        """Build a field by evaluating per-chart callables on the grids."""
        comps = {}
        for cname, chart in atlas.charts.items():
            coords = chart.coords()
            comps[cname] = {key: np.asarray(fn(*coords))
                            for key, fn in specs[cname].items()}
        return cls(atlas, degree, comps, rank=rank)

    def _zip_with(self, other, op):
        if not isinstance(other, FormField):
            raise TypeError("expected a FormField")
        if self.atlas is not other.atlas:
            raise ValueError("fields live on different atlases")
        if self.degree != other.degree or self.rank != other.rank:
            raise ValueError("degree or rank mismatch")
        comps = {cname: {key: op(arr, other.comps[cname][key])
                         for key, arr in chart_comps.items()}
                 for cname, chart_comps in self.comps.items()}
        return FormField(self.atlas, self.degree, comps, rank=self.rank)

    def __add__(self, other):
        return self._zip_with(other, lambda a, b: a + b)

    def __sub__(self, other):
        return self._zip_with(other, lambda a, b: a - b)

    def __mul__(self, scalar):
        if isinstance(scalar, FormField):
            raise TypeError("use wedge for form products")
        comps = {cname: {key: scalar * arr for key, arr in chart_comps.items()}
                 for cname, chart_comps in self.comps.items()}
        return FormField(self.atlas, self.degree, comps, rank=self.rank)

    __rmul__ = __mul__

    def __neg__(self):
        return (-1.0) * self

    def wedge(self, other):
        """Wedge product; matrix-valued coefficients compose by matmul."""
        if not isinstance(other, FormField):
            raise TypeError("expected a FormField")
        if self.atlas is not other.atlas:
            raise ValueError("fields live on different atlases")
        degree = self.degree + other.degree
        if degree > self.atlas.dim:
            raise ValueError("wedge degree exceeds the atlas dimension")
        if self.rank is not None and other.rank is not None \
                and self.rank != other.rank:
            raise ValueError("matrix ranks differ")
        rank = self.rank if self.rank is not None else other.rank
        comps = {}
        for cname, chart in self.atlas.charts.items():
            out = {}
            for key_a, arr_a in self.comps[cname].items():
                for key_b, arr_b in other.comps[cname].items():
                    if set(key_a) & set(key_b):
                        continue
                    inversions = sum(1 for i in key_a for j in key_b if i > j)
                    sign = -1.0 if inversions % 2 else 1.0
                    merged = tuple(sorted(key_a + key_b))
                    term = sign * _coef_product(arr_a, self.rank,
                                                arr_b, other.rank)
                    if merged in out:
                        out[merged] = out[merged] + term
                    else:
                        out[merged] = term
            comps[cname] = out
        return FormField(self.atlas, degree, comps, rank=rank)

    def exterior_derivative(self):
        """d of the field by per-panel spectral differentiation."""
        if self.degree >= self.atlas.dim:
            raise ValueError("cannot raise the degree beyond the dimension")
        comps = {}
        for cname, chart in self.atlas.charts.items():
            out = {}
            for key, arr in self.comps[cname].items():
                for axis in range(chart.dim):
                    if axis in key:
                        continue
                    position = sum(1 for i in key if i < axis)
                    sign = -1.0 if position % 2 else 1.0
                    merged = tuple(sorted(key + (axis,)))
                    term = sign * chart.differentiate(arr, axis)
                    if merged in out:
                        out[merged] = out[merged] + term
                    else:
                        out[merged] = term
            comps[cname] = out
        return FormField(self.atlas, self.degree + 1, comps, rank=self.rank)

    def trace(self):
        """Pointwise matrix trace, producing a scalar-valued field."""
        if self.rank is None:
            raise ValueError("trace requires a matrix-valued field")
        comps = {cname: {key: np.einsum("...aa->...", arr)
                         for key, arr in chart_comps.items()}
                 for cname, chart_comps in self.comps.items()}
        return FormField(self.atlas, self.degree, comps, rank=None)

    def overlap_residual(self, max_points=2000):
        """Max deviation from Jacobian-pullback consistency on overlaps."""
        worst = 0.0
        keys = _form_keys(self.atlas.dim, self.degree)
        for (a, b), overlap in self.atlas.overlaps.items():
            sampled = _overlap_samples(self.atlas, a, b, overlap, max_points)
            if sampled is None:
                continue
            idx, _, pts, jac = sampled
            pulled = _pullback_values(self.atlas.charts[b], self.comps[b],
                                      keys, self.degree, pts, jac)
            for key in keys:
                stored = _gather(self.comps[a][key], self.atlas.charts[a], idx)
                worst = max(worst, float(np.max(np.abs(stored - pulled[key]))))
        return worst


def _coef_product(arr_a, rank_a, arr_b, rank_b):
    if rank_a is None and rank_b is None:
        return arr_a * arr_b
    if rank_a is not None and rank_b is not None:
        return np.einsum("...ab,...bc->...ac", arr_a, arr_b)
    if rank_a is None:
        return arr_a[..., None, None] * arr_b
    return arr_a * arr_b[..., None, None]


def _gather(grid_array, chart, flat_idx):
    trail = grid_array.shape[chart.dim:]
    return grid_array.reshape((-1,) + trail)[flat_idx]


def _overlap_samples(atlas, a, b, overlap, max_points):
    """Subsampled overlap nodes of chart a with mapped points and Jacobians."""
    chart_a = atlas.charts[a]
    chart_b = atlas.charts[b]
    coords = chart_a.coords()
    inside = np.asarray(overlap.mask(*coords), dtype=bool)
    idx = np.flatnonzero(inside.ravel())
    if idx.size == 0:
        return None
    stride = max(1, idx.size // max_points)
    idx = idx[::stride]
    flat = [c.ravel()[idx] for c in coords]
    mapped = overlap.mapper(*flat)
    pts = np.stack([np.asarray(m, dtype=float) for m in mapped], axis=-1)
    keep = chart_b.contains(pts)
    if not keep.all():
        idx = idx[keep]
        flat = [f[keep] for f in flat]
        pts = pts[keep]
    if idx.size == 0:
        return None
    jac = np.asarray(overlap.jacobian(*flat), dtype=float)
    return idx, flat, pts, jac


def _pullback_values(chart_b, comps_b, keys, degree, pts, jac):
    """Pull back chart-b components to the sampled a-chart points."""
    interp = {key: chart_b.interpolate(arr, pts) for key, arr in comps_b.items()}
    if degree == 0:
        return {(): interp[()]}
    pulled = {}
    for key_i in keys:
        total = None
        cols = list(key_i)
        for key_j, values in interp.items():
            rows = list(key_j)
            minors = np.linalg.det(jac[:, rows][:, :, cols])
            factor = minors if values.ndim == 1 else minors[:, None, None]
            term = factor * values
            total = term if total is None else total + term
        pulled[key_i] = total
    return pulled


def integrate_top(form):
    """Pair a scalar top-degree form with the fundamental class by quadrature."""
    if not isinstance(form, FormField):
        raise TypeError("expected a FormField")
    atlas = form.atlas
    if form.degree != atlas.dim:
        raise ValueError("integrate_top requires a top-degree form")
    if form.rank is not None:
        raise TypeError("integrate_top requires scalar-valued coefficients; "
                        "take a trace first")
    key = tuple(range(atlas.dim))
    total = 0.0
    for cname, chart in atlas.charts.items():
        comp = form.comps[cname][key]
        total = total + chart.orientation * np.sum(
            chart.node_weights() * atlas.pou[cname] * comp)
    return total


class ModuleConnection:
    """Per-chart anti-Hermitian connection 1-forms over a gerbe module.

    `forms[chart]` lists one (grid + rank x rank) array per coordinate axis;
    `transitions[(a, b)]` evaluates the module transition phi_ab at points
    given in a-chart coordinates. Gluing is validated on construction.
    """

    def __init__(self, atlas, module, forms, transitions, tol=1e-6):
        self.atlas = atlas
        self.module = module
        self.tol = float(tol)
        rank = module.rank
        self.forms = {}
        for cname, chart in atlas.charts.items():
            if cname not in forms:
                raise ValueError(f"missing connection forms for chart {cname!r}")
            entry = list(forms[cname])
            if len(entry) != chart.dim:
                raise ValueError("one connection matrix per axis is required")
            converted = []
            for arr in entry:
                arr = np.asarray(arr, dtype=complex)
                if arr.shape != chart.shape + (rank, rank):
                    raise ValueError(
                        f"connection form on {cname!r} must have shape "
                        f"{chart.shape + (rank, rank)}")
                herm = np.max(np.abs(arr + arr.conj().swapaxes(-1, -2)))
                if herm > 1e-10:
                    raise ValueError(
                        f"connection form on {cname!r} is not anti-Hermitian "
                        f"(residual {herm:.2e})")
                converted.append(arr)
            self.forms[cname] = converted
        self.transitions = dict(transitions)
        for key in atlas.overlaps:
            if key not in self.transitions:
                raise ValueError(f"missing transition function for overlap {key}")
        residual = self.gluing_residual()
        if residual > self.tol:
            raise ValueError(
                f"connection gluing residual {residual:.3e} exceeds "
                f"{self.tol:.1e}; connection rejected")

    def _inverse(self, mats):
        if self.module.unitary:
            return mats.conj().swapaxes(-1, -2)
        return np.linalg.inv(mats)

    def gluing_residual(self, max_points=1500):
        """Max residual of A_a = phi A_b phi^-1 - (d phi) phi^-1 on overlaps."""
        atlas = self.atlas
        rank = self.module.rank
        worst = 0.0
        for (a, b), overlap in atlas.overlaps.items():
            chart_a = atlas.charts[a]
            coords = chart_a.coords()
            phi_grid = np.asarray(self.transitions[(a, b)](*coords),
                                  dtype=complex)
            if phi_grid.shape != chart_a.shape + (rank, rank):
                raise ValueError(f"transition on {(a, b)} has wrong shape")
            dphi = [chart_a.differentiate(phi_grid, axis)
                    for axis in range(chart_a.dim)]
            sampled = _overlap_samples(atlas, a, b, overlap, max_points)
            if sampled is None:
                continue
            idx, _, pts, jac = sampled
            interp_b = [atlas.charts[b].interpolate(arr, pts)
                        for arr in self.forms[b]]
            phi = _gather(phi_grid, chart_a, idx)
            phi_inv = self._inverse(phi)
            for axis in range(chart_a.dim):
                pulled = sum(jac[:, j, axis, None, None] * interp_b[j]
                             for j in range(chart_a.dim))
                rhs = phi @ pulled @ phi_inv \
                    - _gather(dphi[axis], chart_a, idx) @ phi_inv
                stored = _gather(self.forms[a][axis], chart_a, idx)
                worst = max(worst, float(np.max(np.abs(stored - rhs))))
        return worst


def _conjugated_residual(conn, field, max_points=1500):
    """Residual of X_a = phi (pullback X_b) phi^-1 for a matrix form field."""
    atlas = conn.atlas
    keys = _form_keys(atlas.dim, field.degree)
    worst = 0.0
    for (a, b), overlap in atlas.overlaps.items():
        sampled = _overlap_samples(atlas, a, b, overlap, max_points)
        if sampled is None:
            continue
        idx, flat, pts, jac = sampled
        pulled = _pullback_values(atlas.charts[b], field.comps[b],
                                  keys, field.degree, pts, jac)
        phi = np.asarray(conn.transitions[(a, b)](*flat), dtype=complex)
        phi_inv = conn._inverse(phi)
        for key in keys:
            stored = _gather(field.comps[a][key], atlas.charts[a], idx)
            conjugated = phi @ pulled[key] @ phi_inv
            worst = max(worst, float(np.max(np.abs(stored - conjugated))))
    return worst


def curvature(conn, tol=1e-6):
    """F = dA + A ^ A per chart, with the descent check on overlaps."""
    atlas = conn.atlas
    rank = conn.module.rank
    comps = {}
    for cname, chart in atlas.charts.items():
        forms = conn.forms[cname]
        out = {}
        for i in range(chart.dim):
            for j in range(i + 1, chart.dim):
                out[(i, j)] = (chart.differentiate(forms[j], i)
                               - chart.differentiate(forms[i], j)
                               + forms[i] @ forms[j] - forms[j] @ forms[i])
        comps[cname] = out
    field = FormField(atlas, 2, comps, rank=rank)
    residual = _conjugated_residual(conn, field)
    if residual > tol:
        raise ValueError(
            f"curvature fails to descend: overlap residual {residual:.3e} "
            f"exceeds {tol:.1e}")
    return field


def connection_difference(c1, c2, tol=1e-6):
    """Difference of two connections on the same module, as a global 1-form."""
    if c1.atlas is not c2.atlas:
        raise ValueError("connections live on different atlases")
    if c1.module is not c2.module:
        raise ValueError("connection difference requires the same module")
    atlas = c1.atlas
    comps = {}
    for cname, chart in atlas.charts.items():
        comps[cname] = {(axis,): c1.forms[cname][axis] - c2.forms[cname][axis]
                        for axis in range(chart.dim)}
    field = FormField(atlas, 1, comps, rank=c1.module.rank)
    residual = _conjugated_residual(c1, field)
    if residual > tol:
        raise ValueError(
            f"difference does not glue by conjugation: residual {residual:.3e}")
    return field


def tensor_connection(c1, c2):
    """Product connection A_1 x 1 + 1 x A_2 on the tensor-product module."""
    if c1.atlas is not c2.atlas:
        raise ValueError("tensor product requires a common atlas")
    atlas = c1.atlas
    module = tensor_modules(c1.module, c2.module)
    r1 = c1.module.rank
    r2 = c2.module.rank
    eye1 = np.eye(r1, dtype=complex)
    eye2 = np.eye(r2, dtype=complex)
    forms = {}
    for cname, chart in atlas.charts.items():
        combined = []
        for axis in range(chart.dim):
            a1 = c1.forms[cname][axis]
            a2 = c2.forms[cname][axis]
            t1 = np.einsum("...ab,cd->...acbd", a1, eye2)
            t2 = np.einsum("ab,...cd->...acbd", eye1, a2)
            combined.append((t1 + t2).reshape(chart.shape + (r1 * r2, r1 * r2)))
        forms[cname] = combined
    transitions = {key: _kron_transition(c1.transitions[key],
                                         c2.transitions[key], r1, r2)
                   for key in atlas.overlaps}
    return ModuleConnection(atlas, module, forms, transitions,
                            tol=max(c1.tol, c2.tol))


def _kron_transition(f1, f2, r1, r2):
    def combined(*coords):
        phi1 = np.asarray(f1(*coords), dtype=complex)
        phi2 = np.asarray(f2(*coords), dtype=complex)
        out = np.einsum("...ab,...cd->...acbd", phi1, phi2)
        return out.reshape(phi1.shape[:-2] + (r1 * r2, r1 * r2))
    return combined
