import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kato.neural import (
    AdamState,
    LabeledSample,
    SelectionModel,
    TrainConfig,
    adam_step,
    backward,
    batch_gradients,
    bce_loss,
    dataset_loss,
    encode_sort,
    forward,
    init_model,
    normalize,
    predict_selection,
    train,
)
from kato.neural.features import default_bounds
from kato.neural.model import ARCHS, select_from_probabilities
from kato.vec_model import GenConfig, RsuProfile, VehicleState, sample_scenario
from kato.exact_solver import label_scenario


def random_A(rng, n):
    A = rng.uniform(0.0, 1.0, size=(n, 4))
    A[0, 3] = 0.0
    return A


def loss_of(model, A, y):
    return bce_loss(forward(A, model)[0], y)


def fd_check(model, A, y, step=1e-5):
    """Worst relative error of the analytic gradient against central differences."""
    _, cache = forward(A, model)
    grads = backward(cache, y)
    worst = 0.0
    for name, theta in model.params.items():
        flat = theta.reshape(-1)
        g = np.asarray(grads[name]).reshape(-1)
        for k in range(flat.size):
            orig = flat[k]
            flat[k] = orig + step
            up = loss_of(model, A, y)
            flat[k] = orig - step
            down = loss_of(model, A, y)
            flat[k] = orig
            num = (up - down) / (2 * step)
            worst = max(worst, abs(num - g[k]) / max(abs(num), abs(g[k]), 1e-7))
    return worst


def test_encode_sort_orders_by_beta_then_snr():
    v = VehicleState(5.0, 6.0, 15.0, 2.0)
    rsus = [RsuProfile(1, 0, 0, 3.0, 20.0), RsuProfile(2, 1, 1, 1.0, 20.0),
            RsuProfile(3, 2, 2, 1.0, 30.0)]
    A, ids = encode_sort(v, rsus)
    assert ids == [0, 3, 2, 1]
    assert A[0].tolist() == [5.0, 6.0, 2.0, 0.0]
    assert A[1, 3] == pytest.approx(1000.0)
    _, ids_desc = encode_sort(v, rsus, ascending_beta=False)
    assert ids_desc == [0, 1, 3, 2]


def test_normalize_clamps_and_keeps_vehicle_snr_zero():
    lo, hi = np.zeros(4), np.array([100.0, 100.0, 10.0, 1000.0])
    A = np.array([[50.0, 0.0, 12.0, 0.0], [-5.0, 100.0, 5.0, 500.0]])
    out = normalize(A, lo, hi)
    assert out.tolist() == [[0.5, 0.0, 1.0, 0.0], [0.0, 1.0, 0.5, 0.5]]
    out = normalize(A, lo + np.array([0, 0, 0, 100.0]), hi)
    assert out[0, 3] == 0.0


def test_default_bounds_follow_generator():
    lo, hi = default_bounds(GenConfig(f_ghz=(0.5, 10.0)))
    assert lo.tolist() == [0, 0, 0, 0]
    assert hi.tolist() == pytest.approx([100.0, 100.0, 2.0, 1000.0])


@pytest.mark.parametrize("arch", ARCHS)
@pytest.mark.parametrize("n", [1, 2, 7, 30])
def test_forward_shape_and_range(arch, n):
    p, _ = forward(random_A(np.random.default_rng(n), n), init_model(arch, seed=1))
    assert p.shape == (n,)
    assert np.all((p > 0) & (p < 1))


@pytest.mark.parametrize("arch, count", [("kato", 42), ("sa", 42), ("mlp", 31)])
def test_parameter_counts(arch, count):
    assert init_model(arch).n_params == count


@pytest.mark.parametrize("arch", ARCHS)
def test_zero_decoder_gives_half(arch):
    p, _ = forward(random_A(np.random.default_rng(0), 9), init_model(arch, zero=True))
    assert np.all(p == 0.5)


def test_zero_decoder_weight_blocks_encoder_gradients():
    model = init_model("kato", seed=2)
    model.params["dec_w"] = np.asarray(0.0)
    rng = np.random.default_rng(0)
    _, cache = forward(random_A(rng, 6), model)
    g = backward(cache, rng.integers(0, 2, 6).astype(float))
    assert not g["W_K"].any() and not g["W_Q"].any()


def test_single_row_attention_variants_agree():
    kato = init_model("kato", seed=4)
    sa = SelectionModel("sa", {k: v.copy() for k, v in kato.params.items()})
    A = random_A(np.random.default_rng(1), 1)
    assert forward(A, sa)[0] == pytest.approx(forward(A, kato)[0], rel=1e-12)


def test_kato_scores_depend_only_on_earlier_rows():
    model = init_model("kato", seed=5)
    rng = np.random.default_rng(3)
    A = random_A(rng, 8)
    p, _ = forward(A, model)
    B = A.copy()
    B[5:] = rng.uniform(size=(3, 4))
    q, _ = forward(B, model)
    assert np.array_equal(p[:5], q[:5])
    assert not np.allclose(p[5:], q[5:])


@pytest.mark.parametrize("arch", ARCHS)
def test_gradients_match_finite_differences(arch):
    rng = np.random.default_rng(11)
    for i in range(10):
        n = int(rng.integers(1, 25))
        model = init_model(arch, seed=i)
        for k in model.params:
            model.params[k] = np.array(model.params[k] * 4.0)
        y = rng.integers(0, 2, n).astype(float)
        y[0] = 1.0
        assert fd_check(model, random_A(rng, n), y) <= 1e-4


@pytest.mark.parametrize("p, y, expected", [
    ([0.5], [1], np.log(2.0)),
    ([0.5, 0.5], [0, 1], np.log(2.0)),
    ([0.9, 0.2], [1, 0], -(np.log(0.9) + np.log(0.8)) / 2),
])
def test_bce_examples(p, y, expected):
    assert bce_loss(p, y) == pytest.approx(expected, rel=1e-12)


def test_bce_clamps_saturated_probabilities():
    assert np.isfinite(bce_loss([0.0, 1.0], [1, 0]))
    assert bce_loss([1.0], [1]) == pytest.approx(0.0, abs=1e-11)


def test_bce_length_mismatch():
    with pytest.raises(ValueError):
        bce_loss([0.5, 0.5], [1])


def test_adam_first_step_magnitude():
    params = {"w": np.array([0.3, -1.0])}
    new, state = adam_step(params, {"w": np.array([1.0, -1.0])}, AdamState.zeros_like(params))
    delta = new["w"] - params["w"]
    assert 0.000999 <= -delta[0] <= 0.001
    assert 0.000999 <= delta[1] <= 0.001
    assert state.t == 1
    assert params["w"].tolist() == [0.3, -1.0]


def sample_from(seed, n=12):
    s, _ = label_scenario(sample_scenario(GenConfig.fixed(n), seed, seed))
    return s


def test_duplicated_sample_doubles_summed_gradient():
    model = init_model("kato", seed=0)
    s = sample_from(1)
    _, g1 = batch_gradients(model, [s], reduction="sum")
    _, g2 = batch_gradients(model, [s, s], reduction="sum")
    for k in g1:
        assert np.allclose(g2[k], 2 * g1[k], rtol=1e-12, atol=0)


def test_batch_gradient_is_mean_of_sample_gradients():
    model = init_model("sa", seed=0)
    batch = [sample_from(i) for i in range(4)]
    _, g = batch_gradients(model, batch)
    parts = [batch_gradients(model, [s])[1] for s in batch]
    for k in g:
        assert np.allclose(g[k], np.mean([p[k] for p in parts], axis=0), rtol=1e-12)


@pytest.fixture(scope="module")
def small_data():
    samples = [sample_from(i) for i in range(120)]
    return samples[:90], samples[90:]


def test_initial_loss_independent_of_batch_size(small_data):
    tr, va = small_data
    model = init_model("kato", seed=9)
    _, h1 = train(tr, va, TrainConfig(epochs=0, batch=1), model=model)
    _, hN = train(tr, va, TrainConfig(epochs=0, batch=len(tr)), model=model)
    assert h1.train_loss == hN.train_loss == [dataset_loss(model, tr)]


@pytest.mark.parametrize("arch", ARCHS)
def test_training_is_deterministic_and_keeps_best(arch, small_data):
    tr, va = small_data
    cfg = TrainConfig(arch=arch, epochs=3, batch=16, seed=4)
    a, ha = train(tr, va, cfg)
    b, hb = train(tr, va, cfg)
    assert ha.val_loss == hb.val_loss
    for k in a.params:
        assert np.array_equal(a.params[k], b.params[k])
    assert len(ha.val_loss) == 4
    assert dataset_loss(a, va) == pytest.approx(min(ha.val_loss), rel=1e-12)
    assert a.train_meta["best_epoch"] == ha.best_epoch


def test_training_rejects_empty_set():
    with pytest.raises(ValueError):
        train([], [], TrainConfig())


def test_threshold_is_inclusive_and_vehicle_always_kept():
    assert select_from_probabilities([0.0, 0.5, 0.4999, 0.9], [0, 7, 3, 2]) == (0, 2, 7)


def test_zero_model_selects_everything():
    s = sample_scenario(GenConfig.fixed(10), 0)
    sel = predict_selection(init_model("kato", zero=True), s.vehicle, s.rsus)
    assert sel == (0,) + tuple(sorted(r.id for r in s.rsus))


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10_000), arch=st.sampled_from(ARCHS))
def test_selection_invariant_to_input_order(seed, arch):
    s = sample_scenario(GenConfig.fixed(8), seed)
    model = init_model(arch, seed=seed)
    rev = tuple(reversed(s.rsus))
    assert predict_selection(model, s.vehicle, s.rsus) == predict_selection(model, s.vehicle, rev)


def test_labeled_sample_validation():
    with pytest.raises(ValueError):
        LabeledSample(np.zeros((2, 4)), np.array([1, 2]), (0, 1), 0)
    with pytest.raises(ValueError):
        LabeledSample(np.zeros((2, 4)), np.array([1]), (0, 1), 0)


def test_model_round_trip():
    model = init_model("mlp", seed=3)
    back = SelectionModel.from_dict(model.to_dict())
    assert back.arch == "perceptron"
    for k in model.params:
        assert np.array_equal(back.params[k], model.params[k])
    assert np.array_equal(back.norm_hi, model.norm_hi)
