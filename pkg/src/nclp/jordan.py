"""Normal Jordan *-morphisms in canonical tile form.

Every normal Jordan *-morphism between direct sums of matrix blocks is
unitarily equivalent to a sum of tiles: each tile copies one source block
into a diagonal range of a destination block, either as written
(homomorphic, kind H) or transposed (antihomomorphic, kind A), optionally
conjugated by a unitary.  Storing that witness makes the central projection
z splitting the map into its multiplicative and anti-multiplicative parts
exact instead of numerically mined.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidMorphism, NoConvergence, ProfileMismatch
from .matcore import BlockMatrix, BlockProfile, commutator_norm
from .sampling import generator, hermitian
from .vnops import (
    Projection,
    SubalgebraBasis,
    Weight,
    generate_algebra,
    modular_conjugate,
)


@dataclass(frozen=True, eq=False)
class Tile:
    """One diagonal copy of a source block inside a destination block."""

    src: int
    dst: int
    offset: int
    kind: str  # "H" (as written) or "A" (transposed)
    conj_unitary: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in ("H", "A"):
            raise ValueError(f"tile kind must be 'H' or 'A', got {self.kind!r}")


def _as_unitary(u, dim, what):
    arr = np.array(u, dtype=complex)
    if arr.shape != (dim, dim):
        raise ProfileMismatch(f"{what} has shape {arr.shape}, expected {(dim, dim)}")
    defect = np.linalg.norm(arr @ arr.conj().T - np.eye(dim))
    if defect > 1e-8 * dim:
        raise InvalidMorphism(f"{what} is not unitary (defect {defect:.3e})")
    return arr


class JordanMorphismSpec:
    """A normal Jordan *-morphism between block profiles, stored as tiles."""

    __slots__ = ("profile1", "profile2", "tiles", "block_unitaries")

    def __init__(self, profile1: BlockProfile, profile2: BlockProfile, tiles,
                 block_unitaries=None, verify: bool = True):
        norm_tiles = []
        for t in tiles:
            if not 0 <= t.src < profile1.block_count:
                raise ProfileMismatch(f"tile source index {t.src} out of range")
            if not 0 <= t.dst < profile2.block_count:
                raise ProfileMismatch(f"tile destination index {t.dst} out of range")
            size = profile1.dims[t.src]
            if t.offset < 0 or t.offset + size > profile2.dims[t.dst]:
                raise ProfileMismatch(
                    f"tile at offset {t.offset} (size {size}) overflows "
                    f"destination block of size {profile2.dims[t.dst]}"
                )
            u = None
            if t.conj_unitary is not None:
                u = _as_unitary(t.conj_unitary, size, "tile unitary")
                u.setflags(write=False)
            kind = t.kind
            if size == 1:
                kind = "H"  # 1x1 sources: H and A coincide, stored as H
            norm_tiles.append(Tile(t.src, t.dst, t.offset, kind, u))
        # tiles on one destination block must occupy disjoint diagonal ranges
        by_dst = {}
        for t in norm_tiles:
            by_dst.setdefault(t.dst, []).append(t)
        for dst, group in by_dst.items():
            spans = sorted((t.offset, t.offset + profile1.dims[t.src]) for t in group)
            for (a0, a1), (b0, _) in zip(spans, spans[1:]):
                if b0 < a1:
                    raise ProfileMismatch(
                        f"tiles overlap on destination block {dst}"
                    )
        bus = None
        if block_unitaries is not None:
            bus = []
            for d, u in enumerate(block_unitaries):
                if u is None:
                    bus.append(None)
                else:
                    w = _as_unitary(u, profile2.dims[d], f"block unitary {d}")
                    w.setflags(write=False)
                    bus.append(w)
            if len(bus) != profile2.block_count:
                raise ProfileMismatch("one block unitary slot per destination block")
            bus = tuple(bus)
        object.__setattr__(self, "profile1", profile1)
        object.__setattr__(self, "profile2", profile2)
        object.__setattr__(self, "tiles", tuple(norm_tiles))
        object.__setattr__(self, "block_unitaries", bus)
        if verify:
            self._self_check()

    def __setattr__(self, name, value):
        raise AttributeError("JordanMorphismSpec is immutable")

    def _self_check(self):
        """Adjoint/square preservation on a small spanning family, and J(1) = projection."""
        rng = generator(20_211_114)
        for _ in range(4):
            a = hermitian(self.profile1, rng)
            ja = self.apply(a)
            scale = max(1.0, a.fro_norm()) ** 2
            if (self.apply(a @ a) - ja @ ja).fro_norm() > 1e-9 * scale:
                raise InvalidMorphism("tile data does not define a Jordan morphism (squares)")
            if (ja - ja.adjoint()).fro_norm() > 1e-9 * scale:
                raise InvalidMorphism("tile data does not define a Jordan morphism (adjoints)")
        j1 = self.unit_image()
        if (j1 @ j1 - j1).fro_norm() > 1e-9:
            raise InvalidMorphism("image of the unit is not a projection")

    # -- action ---------------------------------------------------------

    def apply(self, a: BlockMatrix) -> BlockMatrix:
        if a.profile != self.profile1:
            raise ProfileMismatch("element does not match the source profile")
        out = [np.zeros((d, d), dtype=complex) for d in self.profile2]
        for t in self.tiles:
            sub = a.blocks[t.src]
            if t.kind == "A":
                sub = sub.T
            if t.conj_unitary is not None:
                sub = t.conj_unitary @ sub @ t.conj_unitary.conj().T
            size = self.profile1.dims[t.src]
            out[t.dst][t.offset : t.offset + size, t.offset : t.offset + size] += sub
        if self.block_unitaries is not None:
            for d, w in enumerate(self.block_unitaries):
                if w is not None:
                    out[d] = w @ out[d] @ w.conj().T
        return BlockMatrix(self.profile2, out, copy=False)

    def unit_image(self) -> BlockMatrix:
        """J(1), a projection in the destination algebra."""
        return self.apply(BlockMatrix.identity(self.profile1))

    def hom_projection(self) -> BlockMatrix:
        """The central projection z of the image algebra under which J is multiplicative."""
        out = [np.zeros((d, d), dtype=complex) for d in self.profile2]
        for t in self.tiles:
            if t.kind != "H":
                continue
            size = self.profile1.dims[t.src]
            out[t.dst][t.offset : t.offset + size, t.offset : t.offset + size] += np.eye(size)
        if self.block_unitaries is not None:
            for d, w in enumerate(self.block_unitaries):
                if w is not None:
                    out[d] = w @ out[d] @ w.conj().T
        return BlockMatrix(self.profile2, out, copy=False)

    def covered_src_blocks(self, kind=None):
        if kind is None:
            return sorted({t.src for t in self.tiles})
        return sorted({t.src for t in self.tiles if t.kind == kind})

    def image_basis(self) -> SubalgebraBasis:
        """Basis of the von Neumann algebra generated by the image."""
        gens = []
        for s, size in enumerate(self.profile1.dims):
            for i in range(size):
                for j in range(size):
                    gens.append(self.apply(BlockMatrix.matrix_unit(self.profile1, s, i, j)))
        return generate_algebra(gens)

    def __repr__(self):
        return (
            f"JordanMorphismSpec({self.profile1.dims} -> {self.profile2.dims}, "
            f"{len(self.tiles)} tiles)"
        )


def apply(J: JordanMorphismSpec, a: BlockMatrix) -> BlockMatrix:
    return J.apply(a)


def identity_morphism(profile: BlockProfile) -> JordanMorphismSpec:
    tiles = [Tile(src=i, dst=i, offset=0, kind="H") for i in range(profile.block_count)]
    return JordanMorphismSpec(profile, profile, tiles)


def transpose_morphism(profile: BlockProfile) -> JordanMorphismSpec:
    tiles = [Tile(src=i, dst=i, offset=0, kind="A") for i in range(profile.block_count)]
    return JordanMorphismSpec(profile, profile, tiles)


@dataclass(frozen=True)
class JordanVerification:
    """Result of probing a map for the Jordan *-morphism laws."""

    passed: bool
    max_residual: float
    tolerance: float
    samples: int
    seed: int
    failures: tuple = field(default_factory=tuple)

    def __bool__(self):
        return self.passed


def verify_jordan(morphism, samples: int = 60, seed: int = 0,
                  profile: BlockProfile | None = None,
                  tol: float = 1e-9) -> JordanVerification:
    """Check adjoint preservation, square preservation and linearity on random probes.

    `morphism` may be a JordanMorphismSpec, a SuperOperator-like object with
    .apply and .domain_profile, or a bare callable (then `profile` is needed).
    """
    if isinstance(morphism, JordanMorphismSpec):
        fn = morphism.apply
        profile = morphism.profile1
    elif hasattr(morphism, "apply") and hasattr(morphism, "domain_profile"):
        fn = morphism.apply
        profile = morphism.domain_profile
    else:
        fn = morphism
        if profile is None:
            raise ProfileMismatch("a bare callable needs an explicit source profile")
    rng = generator(seed)
    worst = 0.0
    failures = []
    for k in range(samples):
        a = hermitian(profile, rng)
        ja = fn(a)
        scale = max(1.0, a.fro_norm()) ** 2
        r_adj = (ja - ja.adjoint()).fro_norm() / scale
        r_sq = (fn(a @ a) - ja @ ja).fro_norm() / scale
        b = hermitian(profile, rng)
        alpha = complex(rng.standard_normal(), rng.standard_normal())
        r_lin = (
            fn(alpha * a + b) - alpha * ja - fn(b)
        ).fro_norm() / scale
        res = max(r_adj, r_sq, r_lin)
        worst = max(worst, res)
        if res >= tol:
            failures.append((k, res))
    return JordanVerification(
        passed=worst < tol,
        max_residual=worst,
        tolerance=tol,
        samples=samples,
        seed=seed,
        failures=tuple(failures[:5]),
    )


@dataclass(frozen=True)
class ZDecomposition:
    """Splitting data of a Jordan morphism relative to a destination weight.

    z is the central projection of the image algebra acting multiplicatively;
    e is the central support of the pulled-back weight in the source algebra,
    split as e_z (blocks reached homomorphically) and e_one_minus_z (blocks
    reached antihomomorphically).  The pulled-back weights satisfy
    phi_J = phi_z + phi_{1-z} at the level of densities.
    """

    z: Projection
    e: Projection
    e_z: Projection
    e_one_minus_z: Projection
    weight_total: Weight
    weight_hom: Weight
    weight_anti: Weight


def _central_projection(profile: BlockProfile, blocks_on) -> Projection:
    blocks = []
    for i, d in enumerate(profile.dims):
        blocks.append(np.eye(d, dtype=complex) if i in blocks_on else np.zeros((d, d), dtype=complex))
    return Projection(BlockMatrix(profile, blocks, copy=False))


def _pullback_weight(profile1: BlockProfile, fn) -> Weight:
    """Density of the functional a -> fn(a) from its values on matrix units."""
    blocks = []
    for s, size in enumerate(profile1.dims):
        rho = np.zeros((size, size), dtype=complex)
        for k in range(size):
            for l in range(size):
                # tr(rho E_lk) = rho[k, l]
                rho[k, l] = fn(BlockMatrix.matrix_unit(profile1, s, l, k))
        blocks.append((rho + rho.conj().T) / 2)
    return Weight(BlockMatrix(profile1, blocks, copy=False))


def pushforward_density(J: JordanMorphismSpec, w2: Weight) -> Weight:
    """The weight k on the source algebra with k(a) = w2(J(a)) for all a.

    Jordan morphisms keep trace-form weights trace-form, so k always exists;
    the extraction is verified on a spanning basis.
    """
    w2.require_faithful("pushforward density")
    k = _pullback_weight(J.profile1, lambda a: w2.value(J.apply(a)))
    worst = 0.0
    for s, size in enumerate(J.profile1.dims):
        for i in range(size):
            for j in range(size):
                unit = BlockMatrix.matrix_unit(J.profile1, s, i, j)
                worst = max(
                    worst, abs(k.value(unit) - w2.value(J.apply(unit)))
                )
    scale = max(1.0, w2.rho.max_abs())
    if worst > 1e-9 * scale:
        raise NoConvergence(f"pushforward density extraction failed (residual {worst:.3e})")
    return k


def decompose(J: JordanMorphismSpec, w2: Weight) -> ZDecomposition:
    """Split J into multiplicative and antimultiplicative parts with their weights.

    Verifies the centrality of z against a generated basis of the image
    algebra rather than trusting the tile bookkeeping.
    """
    w2.require_faithful("decomposition")
    z = J.hom_projection()
    basis = J.image_basis()
    scale = max(1.0, z.fro_norm())
    for b in basis.elements:
        if commutator_norm(z, b) > 1e-9 * scale * max(1.0, b.fro_norm()):
            raise InvalidMorphism("hom projection is not central in the image algebra")
    j1 = J.unit_image()
    e = _central_projection(J.profile1, set(J.covered_src_blocks()))
    e_z = _central_projection(J.profile1, set(J.covered_src_blocks("H")))
    e_1z = _central_projection(J.profile1, set(J.covered_src_blocks("A")))
    w_total = _pullback_weight(J.profile1, lambda a: w2.value(J.apply(a)))
    w_hom = _pullback_weight(J.profile1, lambda a: w2.value(z @ J.apply(a)))
    w_anti = _pullback_weight(J.profile1, lambda a: w2.value((j1 - z) @ J.apply(a)))
    gap = (w_total.rho - w_hom.rho - w_anti.rho).fro_norm()
    if gap > 1e-9 * max(1.0, w_total.rho.fro_norm()):
        raise NoConvergence(f"density splitting failed (residual {gap:.3e})")
    join = e_z.join(e_1z)
    if (join.matrix - e.matrix).fro_norm() > 1e-9:
        raise NoConvergence("central support does not match the join of the parts")
    return ZDecomposition(
        z=Projection(z),
        e=e,
        e_z=e_z,
        e_one_minus_z=e_1z,
        weight_total=w_total,
        weight_hom=w_hom,
        weight_anti=w_anti,
    )


def random_morphism(rng, profile1: BlockProfile | None = None,
                    allow_partial: bool = True,
                    allow_mixed: bool = True) -> JordanMorphismSpec:
    """A random tile morphism: mixed H/A kinds, partial supports, multiplicities.

    Destination blocks are packed greedily around the drawn tiles, with a
    little padding so images sit inside strictly larger blocks; random tile
    unitaries and destination unitaries exercise the conjugation freedom.
    """
    from .sampling import unitary

    if profile1 is None:
        profile1 = BlockProfile(rng.integers(1, 4, size=rng.integers(1, 4)))
    plan = []  # (src, kind)
    for s, size in enumerate(profile1.dims):
        max_tiles = 2 if size <= 2 else 1
        low = 0 if allow_partial else 1
        count = int(rng.integers(low, max_tiles + 1))
        for _ in range(count):
            kind = "H"
            if allow_mixed and size > 1 and rng.random() < 0.5:
                kind = "A"
            plan.append((s, kind))
    if not plan:
        plan.append((int(rng.integers(0, profile1.block_count)), "H"))
    order = rng.permutation(len(plan))
    plan = [plan[i] for i in order]
    group_count = 1 if len(plan) == 1 or rng.random() < 0.4 else 2
    groups = [plan[i::group_count] for i in range(group_count)]
    groups = [g for g in groups if g]
    tiles = []
    dst_dims = []
    for d, group in enumerate(groups):
        offset = int(rng.integers(0, 2))
        start_pad = offset
        for s, kind in group:
            size = profile1.dims[s]
            u = unitary(size, rng) if rng.random() < 0.5 else None
            tiles.append(Tile(src=s, dst=d, offset=offset, kind=kind, conj_unitary=u))
            offset += size
        dst_dims.append(offset + int(rng.integers(0, 2)) + (1 if offset == start_pad else 0))
    profile2 = BlockProfile(dst_dims)
    block_unitaries = None
    if rng.random() < 0.5:
        block_unitaries = [
            unitary(d, rng) if rng.random() < 0.7 else None for d in profile2.dims
        ]
    return JordanMorphismSpec(profile1, profile2, tiles, block_unitaries)


def random_onto_morphism(rng, profile1: BlockProfile,
                         anti: bool = False) -> JordanMorphismSpec:
    """A random *-isomorphism (or *-antiisomorphism) onto a permuted profile."""
    from .sampling import unitary

    perm = rng.permutation(profile1.block_count)
    dst_dims = [profile1.dims[s] for s in perm]
    profile2 = BlockProfile(dst_dims)
    kind = "A" if anti else "H"
    tiles = []
    for d, s in enumerate(perm):
        u = unitary(profile1.dims[s], rng)
        tiles.append(Tile(src=int(s), dst=d, offset=0, kind=kind, conj_unitary=u))
    return JordanMorphismSpec(profile1, profile2, tiles)


def is_modular_invariant(B: SubalgebraBasis, w2: Weight, t_samples) -> bool:
    """Whether the modular group of w2 maps the subalgebra into itself.

    Checks that h^{it} b h^{-it} stays in the span of the basis for every
    basis element and every sampled t.
    """
    w2.require_faithful("modular invariance")
    for t in t_samples:
        for b in B.elements:
            moved = modular_conjugate(w2, t, b)
            if B.span_residual(moved) > 1e-8 * max(1.0, moved.fro_norm()):
                return False
    return True
