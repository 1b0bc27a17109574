"""Protocol engine: multiplication, truncation, sign, preprocessing, accounting."""
import random

import pytest

from fedgauss.smc import (
    MODE_DEBUG,
    MODE_FAITHFUL,
    ConfigError,
    FieldConfig,
    PreprocessingExhausted,
    SmcEngine,
    reconstruct,
)
from fedgauss.smc.fixedpoint import centered, fxp_decode, fxp_encode
from fedgauss.smc.ledger import sign_elements


def make_engine(mode=MODE_FAITHFUL, seed=0, l=16, f=6, K=3, **kw):
    cfg = FieldConfig.create(l=l, f=f, K=K, kappa=20)
    return SmcEngine(cfg, mode=mode, seed=seed, **kw)


# ---------------------------------------------------------------------------
# multiplication


@pytest.mark.parametrize("mode", [MODE_FAITHFUL, MODE_DEBUG])
@pytest.mark.parametrize("K", [3, 4, 5, 7])
def test_mul_reconstructs_product(mode, K):
    eng = make_engine(mode, K=K)
    p = eng.cfg.p
    rng = random.Random(3)
    secrets = [(rng.randrange(p), rng.randrange(p)) for _ in range(20)]
    xs = eng.share_batch([a for a, _ in secrets])
    ys = eng.share_batch([b for _, b in secrets])
    prods = eng.mul_batch(list(zip(xs, ys)))
    for (a, b), vec in zip(secrets, prods):
        assert reconstruct(vec) == a * b % p


def test_mul_output_degree_allows_reuse():
    # the degree-reduced product must itself be multipliable
    eng = make_engine(MODE_FAITHFUL, K=5)
    p = eng.cfg.p
    x, y, z = eng.share_batch([3, 5, 7])
    xy = eng.mul_batch([(x, y)])[0]
    xyz = eng.mul_batch([(xy, z)])[0]
    assert reconstruct(xyz) == 105 % p


# ---------------------------------------------------------------------------
# fixed-point multiplication / truncation


def grid_values(rng, cfg, count):
    """Random reals exactly representable with f/2 fractional bits each,
    so pairwise products are exact on the f-bit grid."""
    half = cfg.f // 2
    vals = []
    for _ in range(count):
        vals.append(rng.randrange(-40 << half, 40 << half) / (1 << half))
    return vals


@pytest.mark.parametrize("mode", [MODE_FAITHFUL, MODE_DEBUG])
def test_fxp_mul_error_within_one_ulp(mode):
    eng = make_engine(mode, seed=11)
    cfg = eng.cfg
    rng = random.Random(5)
    a_vals = grid_values(rng, cfg, 50)
    b_vals = grid_values(rng, cfg, 50)
    xs = eng.share_batch([fxp_encode(a, cfg) for a in a_vals])
    ys = eng.share_batch([fxp_encode(b, cfg) for b in b_vals])
    out = eng.fxp_mul_batch(list(zip(xs, ys)))
    ulp = 2.0**-cfg.f
    for a, b, vec in zip(a_vals, b_vals, out):
        got = fxp_decode(reconstruct(vec), cfg)
        err = got - a * b
        # probabilistic truncation rounds down or one ulp past
        assert 0.0 <= err <= ulp + 1e-12, (a, b, got)


def test_fxp_scale_public_matches_mul():
    eng = make_engine(MODE_FAITHFUL, seed=2)
    cfg = eng.cfg
    c = fxp_encode(0.25, cfg)
    xs = eng.share_batch([fxp_encode(v, cfg) for v in (8.0, -12.5, 100.0)])
    out = eng.fxp_scale_public_batch(xs, c)
    for v, vec in zip((8.0, -12.5, 100.0), out):
        got = fxp_decode(reconstruct(vec), cfg)
        assert abs(got - 0.25 * v) <= 2.0**-cfg.f + 1e-12


# ---------------------------------------------------------------------------
# secure sign


@pytest.mark.parametrize("mode", [MODE_FAITHFUL, MODE_DEBUG])
def test_sign_boundary_cases(mode):
    eng = make_engine(mode, seed=4)
    cfg = eng.cfg
    ulp = 1  # one encoding step
    cases = {
        0: -1,  # zero maps to -1 by convention
        ulp: 1,
        -ulp: -1,
        fxp_encode(100.0, cfg): 1,
        fxp_encode(-100.0, cfg): -1,
        (1 << (cfg.l - 1)) - 1: 1,          # largest positive in window
        cfg.p - ((1 << (cfg.l - 1)) - 1): -1,  # most negative
    }
    vecs = eng.share_batch(list(cases))
    for vec, expected in zip(vecs, cases.values()):
        s = eng.secure_sign(vec)
        assert centered(reconstruct(s), cfg) == expected


def test_sign_agrees_across_modes_on_random_inputs():
    rng = random.Random(9)
    values = [rng.randrange(-(1 << 14), 1 << 14) for _ in range(60)]
    results = {}
    for mode in (MODE_FAITHFUL, MODE_DEBUG):
        eng = make_engine(mode, seed=7)
        vecs = eng.share_batch([v % eng.cfg.p for v in values])
        results[mode] = [
            centered(reconstruct(eng.secure_sign(v)), eng.cfg) for v in vecs
        ]
    assert results[MODE_FAITHFUL] == results[MODE_DEBUG]
    for v, s in zip(values, results[MODE_DEBUG]):
        assert s == (1 if v > 0 else -1)


# ---------------------------------------------------------------------------
# preprocessing pool


def test_shared_bits_are_bits():
    eng = make_engine(MODE_FAITHFUL, seed=1)
    eng.refill_preprocessing(64)
    bits = [reconstruct(vec) for vec in eng._bit_pool]
    assert set(bits) <= {0, 1}
    assert 0 < sum(bits) < 64  # not constant


def test_pool_exhaustion_raises_when_not_auto_refilled():
    eng = make_engine(MODE_FAITHFUL, seed=1, auto_refill=False)
    x = eng.share_batch([fxp_encode(2.0, eng.cfg)])[0]
    with pytest.raises(PreprocessingExhausted) as exc:
        eng.secure_sign(x)
    assert exc.value.available == 0
    # refill exactly what the sign consumes (l bits), then it runs
    eng.refill_preprocessing(eng.cfg.l)
    s = eng.secure_sign(x)
    assert centered(reconstruct(s), eng.cfg) == 1
    assert len(eng._bit_pool) == 0


def test_mask_openings_counted_but_not_in_debug():
    faithful = make_engine(MODE_FAITHFUL, seed=3)
    debug = make_engine(MODE_DEBUG, seed=3)
    for eng in (faithful, debug):
        xs = eng.share_batch([fxp_encode(1.5, eng.cfg), fxp_encode(2.0, eng.cfg)])
        prod = eng.fxp_mul_batch([(xs[0], xs[1])])[0]
        eng.secure_sign(prod)
    assert faithful.mask_openings > 0
    assert debug.mask_openings == 0
    kinds = {kind for kind, _ in faithful.opening_log}
    assert kinds == {"mask"}  # nothing was revealed, only masks opened


# ---------------------------------------------------------------------------
# ledger charges


def test_declared_costs_per_operation():
    eng = make_engine(MODE_DEBUG, l=100, f=50)
    cfg = eng.cfg
    xs = eng.share_batch([1, 2, 3, 4, 5])
    assert (eng.ledger.rounds, eng.ledger.elements) == (1, 5)
    eng.mul_batch([(xs[0], xs[1])])
    assert (eng.ledger.rounds, eng.ledger.elements) == (2, 6)
    eng.fxp_mul_batch([(xs[0], xs[1]), (xs[2], xs[3])])
    assert (eng.ledger.rounds, eng.ledger.elements) == (4, 10)
    eng.fxp_scale_public_batch([xs[0]], fxp_encode(0.5, cfg))
    assert (eng.ledger.rounds, eng.ledger.elements) == (6, 11)
    eng.secure_sign(xs[0])
    assert eng.ledger.rounds == 16
    assert eng.ledger.elements == 11 + sign_elements(cfg)
    eng.reveal_batch(xs[:4])
    assert eng.ledger.rounds == 17
    assert eng.ledger.elements == 15 + sign_elements(cfg)
    # per-op breakdown is consistent with the running totals
    s = eng.ledger.summary()
    assert s["rounds"] == 17
    assert s["breakdown"]["share"] == {"calls": 1, "rounds": 1, "elements": 5}
    assert s["breakdown"]["sign"]["elements"] == sign_elements(cfg)


def test_sign_element_formula_at_production_width():
    cfg = FieldConfig.create(l=100, f=50)
    assert sign_elements(cfg) == 16170
    assert cfg.element_bits == 101


def test_ledger_identical_across_modes():
    totals = {}
    for mode in (MODE_FAITHFUL, MODE_DEBUG):
        eng = make_engine(mode, seed=5)
        xs = eng.share_batch([fxp_encode(v, eng.cfg) for v in (1.0, 2.0, 3.0)])
        prod = eng.fxp_mul_batch([(xs[0], xs[1])])[0]
        eng.secure_sign(prod)
        eng.reveal_batch([prod])
        totals[mode] = (eng.ledger.rounds, eng.ledger.elements)
    assert totals[MODE_FAITHFUL] == totals[MODE_DEBUG]


# ---------------------------------------------------------------------------
# determinism, views, config


def test_same_seed_same_openings():
    def run(seed):
        eng = make_engine(MODE_FAITHFUL, seed=seed)
        xs = eng.share_batch([fxp_encode(v, eng.cfg) for v in (4.5, -1.25)])
        prod = eng.fxp_mul_batch([(xs[0], xs[1])])[0]
        return eng.reveal_batch([prod])[0]

    assert run(42) == run(42)


def test_views_record_incoming_shares():
    eng = make_engine(MODE_FAITHFUL, seed=0, record_views=True)
    assert len(eng.views) == eng.cfg.K
    eng.share_batch([7], dealers=[0])
    assert len(eng.views[0]) == 0      # the dealer learns nothing new
    assert len(eng.views[1]) == 1      # others receive one share each
    assert len(eng.views[2]) == 1


def test_engine_rejects_unknown_mode(cfg_small):
    with pytest.raises(ConfigError):
        SmcEngine(cfg_small, mode="plaintext")


def test_share_batch_dealer_length_mismatch(cfg_small):
    eng = SmcEngine(cfg_small, mode=MODE_DEBUG)
    from fedgauss.transform import DomainError

    with pytest.raises(DomainError):
        eng.share_batch([1, 2], dealers=[0])


# ---------------------------------------------------------------------------
# privacy: one party's view is distributed independently of the inputs


def test_single_party_view_independent_of_secrets():
    """Chi-square two-sample test on the values party 2 observes while the
    engine multiplies and signs two very different secret pairs.  A
    distribution difference would be an information leak past the t-privacy
    threshold; the masked openings are secret-independent only up to 2**-kappa
    statistical distance, far below this test's power."""
    from scipy.stats import chi2_contingency

    def collect(a, b, seed):
        eng = make_engine(MODE_FAITHFUL, seed=seed, record_views=True)
        cfg = eng.cfg
        xs = eng.share_batch(
            [fxp_encode(a, cfg), fxp_encode(b, cfg)], dealers=[0, 1]
        )
        prod = eng.fxp_mul_batch([(xs[0], xs[1])])[0]
        eng.secure_sign(prod)
        return [v for _, v in eng.views[2]]

    p = FieldConfig.create(l=16, f=6, K=3, kappa=20).p
    samples = {0: [], 1: []}
    for seed in range(400):
        samples[0].extend(collect(30.5, 11.25, seed))
        samples[1].extend(collect(-0.015625, -500.0, seed + 10_000))

    bins = 12
    table = [[0] * bins for _ in range(2)]
    for row, vals in samples.items():
        for v in vals:
            table[row][min(int(v * bins / p), bins - 1)] += 1
    _, pvalue, _, _ = chi2_contingency(table)
    assert pvalue > 0.01
