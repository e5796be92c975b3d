import numpy as np
import pytest

from fllab.neural import (
    LstmConfig,
    NonFiniteGradient,
    RmsProp,
    Tensor,
    TransformerConfig,
    make_model,
    mse_masked,
    positional_signal,
    predict_legal,
)
from fllab.neural.models import _ModelBase, sinusoidal_table
from gradcheck import max_relative_error, random_problem

VOCAB = ("a", "b", "c")


@pytest.mark.parametrize("scheme", ["masking", "absolute", "relative", "cos", "trainable"])
def test_transformer_gradients(scheme):
    rng = np.random.default_rng(10)
    problem = random_problem(VOCAB, rng)
    cfg = TransformerConfig(vocab=VOCAB, d_model=8, heads=2, layers=2, scheme=scheme, max_len=16)
    model = make_model(cfg, seed=3)
    worst, name = max_relative_error(model, *problem, seed=3)
    assert worst < 1e-4, name


def test_lstm_gradients():
    rng = np.random.default_rng(11)
    problem = random_problem(VOCAB, rng)
    model = make_model(LstmConfig(vocab=VOCAB, hidden=5, layers=2), seed=4)
    worst, name = max_relative_error(model, *problem, seed=4)
    assert worst < 1e-4, name


def test_causality_every_scheme():
    for scheme in ("masking", "absolute", "relative", "cos", "trainable"):
        cfg = TransformerConfig(vocab=VOCAB, d_model=8, heads=2, layers=2, scheme=scheme, max_len=16)
        model = make_model(cfg, seed=5)
        r1 = model.step_outputs("abcab")
        r2 = model.step_outputs("abcbb")  # perturb position 4
        assert np.array_equal(r1[:3], r2[:3])
        assert not np.array_equal(r1[3:], r2[3:])
    model = make_model(LstmConfig(vocab=VOCAB, hidden=6, layers=1), seed=5)
    r1 = model.step_outputs("abcab")
    r2 = model.step_outputs("abcbb")
    assert np.array_equal(r1[:3], r2[:3])


def test_masking_only_constant_on_unary_input():
    cfg = TransformerConfig(vocab=("a",), d_model=8, heads=2, layers=3, scheme="masking")
    model = make_model(cfg, seed=6)
    rows = model.step_outputs("a" * 20)
    assert np.abs(rows - rows[0]).max() < 1e-6


def test_zero_output_layer_gives_half():
    cfg = TransformerConfig(vocab=("a",), d_model=8, heads=1, layers=1, scheme="masking")
    model = make_model(cfg, seed=7)
    model.params["out_w"].data[...] = 0.0
    model.params["out_b"].data[...] = 0.0
    assert np.all(model.step_outputs("aaaa") == 0.5)


def test_positional_signal_examples():
    assert np.allclose(positional_signal("cos", 1, 5), -np.ones(5))
    assert np.allclose(positional_signal("cos", 2, 5), np.ones(5))
    assert np.array_equal(positional_signal("masking", 9, 4), np.zeros(4))
    with pytest.raises(ValueError):
        positional_signal("cos", 0, 4)
    with pytest.raises(ValueError):
        positional_signal("relative", 1, 4)
    table = np.arange(12).reshape(3, 4)
    assert np.array_equal(positional_signal("trainable", 2, 4, table), table[1])
    with pytest.raises(ValueError):
        positional_signal("trainable", 4, 4, table)


def test_sinusoidal_rows_distinct_and_cos_periodic():
    table = sinusoidal_table(64, 8)
    flat = {tuple(np.round(row, 9)) for row in table}
    assert len(flat) == 64  # absolute encodings separate all positions here
    assert positional_signal("absolute", 3, 8) == pytest.approx(table[2])
    cfg = TransformerConfig(vocab=("a",), d_model=4, heads=1, layers=1, scheme="cos")
    model = make_model(cfg, seed=1)
    pos = model._positional(6)
    assert np.array_equal(pos[0], pos[2]) and np.array_equal(pos[1], pos[3])
    assert not np.array_equal(pos[0], pos[1])


def test_predict_legal_threshold():
    assert predict_legal([0.9, 0.2, 0.6]).tolist() == [1, 0, 1]
    assert predict_legal([0.5, 0.5]).tolist() == [0, 0]  # ties predict 0
    assert predict_legal([0.51] * 4).tolist() == [1, 1, 1, 1]


def test_rmsprop_examples():
    theta = Tensor(np.array([1.0]))
    opt = RmsProp({"theta": theta}, lr=0.01, alpha=0.99, eps=1e-8)
    theta.grad = np.array([0.0])
    opt.step()
    assert theta.data[0] == 1.0  # zero gradient: unchanged
    theta.grad = np.array([1.0])
    opt.step()
    assert opt.state["theta"][0] == pytest.approx(0.01)
    assert theta.data[0] == pytest.approx(1.0 - 0.01 / (0.1 + 1e-8))
    theta.grad = np.array([np.nan])
    with pytest.raises(NonFiniteGradient):
        opt.step()


def test_rmsprop_update_direction_follows_gradient_sign():
    rng = np.random.default_rng(0)
    theta = Tensor(rng.normal(size=(4,)))
    opt = RmsProp({"t": theta}, lr=0.01)
    g = np.array([1.0, -2.0, 3.0, -0.5])
    before = theta.data.copy()
    theta.grad = g
    opt.step()
    assert np.all(np.sign(before - theta.data) == np.sign(g))


def test_duplicated_batch_same_gradient():
    cfg = TransformerConfig(vocab=VOCAB, d_model=8, heads=1, layers=1, scheme="masking")
    model = make_model(cfg, seed=8)
    tokens = np.array([[0, 1, 2]])
    lengths = np.array([3])
    mask = np.ones((1, 3))
    targets = np.zeros((1, 3, 4))
    loss = mse_masked(model.forward_tokens(tokens, lengths), targets, mask)
    loss.backward()
    single = {k: t.grad.copy() for k, t in model.params.items()}
    for t in model.params.values():
        t.grad = None
    loss2 = mse_masked(
        model.forward_tokens(np.repeat(tokens, 2, 0), np.repeat(lengths, 2)),
        np.repeat(targets, 2, 0),
        np.repeat(mask, 2, 0),
    )
    loss2.backward()
    for k, t in model.params.items():
        assert np.allclose(t.grad, single[k], atol=1e-12), k


def test_saturated_perfect_fit_has_tiny_gradient():
    cfg = TransformerConfig(vocab=("a",), d_model=4, heads=1, layers=1, scheme="masking")
    model = make_model(cfg, seed=9)
    model.params["out_w"].data[...] = 0.0
    model.params["out_b"].data[...] = 30.0  # sigmoid(30) ~ 1 - 1e-13
    tokens = np.zeros((1, 4), dtype=int)
    lengths = np.array([4])
    mask = np.ones((1, 4))
    targets = np.ones((1, 4, 2))
    loss = mse_masked(model.forward_tokens(tokens, lengths), targets, mask)
    assert loss.data.item() < 1e-20
    loss.backward()
    norms = [np.abs(t.grad).max() for t in model.params.values() if t.grad is not None]
    assert max(norms) < 1e-8


def test_lstm_matches_stepwise_reference():
    cfg = LstmConfig(vocab=("a", "b"), hidden=5, layers=1)
    model = make_model(cfg, seed=10)
    word = "abbaab"
    tokens = model.tokenize(word)[None, :]
    probs = model.forward_tokens(tokens, np.array([len(word)])).data[0]

    emb = model.params["embed"].data
    wx, wh = model.params["l0.wx"].data, model.params["l0.wh"].data
    b = model.params["l0.b"].data
    ow, ob = model.params["out_w"].data, model.params["out_b"].data
    h = np.zeros(5)
    c = np.zeros(5)
    sig = lambda z: 1.0 / (1.0 + np.exp(-z))
    ref_rows = []
    for s in word:
        z = emb[model.tokenize(s)[0]] @ wx + h @ wh + b
        i, f, g, o = sig(z[:5]), sig(z[5:10]), np.tanh(z[10:15]), sig(z[15:])
        c = f * c + i * g
        h = o * np.tanh(c)
        ref_rows.append(sig(h @ ow + ob))
    assert np.abs(probs - np.array(ref_rows)).max() < 1e-10


def test_checkpoint_roundtrip_and_mismatch(tmp_path):
    cfg = TransformerConfig(vocab=VOCAB, d_model=8, heads=2, layers=2, scheme="trainable", max_len=12)
    model = make_model(cfg, seed=11)
    path = tmp_path / "model.npz"
    model.save(path)
    loaded = _ModelBase.load(path)
    assert loaded.config == model.config
    assert np.array_equal(loaded.step_outputs("abc"), model.step_outputs("abc"))
    lstm = make_model(LstmConfig(vocab=VOCAB, hidden=4, layers=1), seed=1)
    lstm_path = tmp_path / "lstm.npz"
    lstm.save(lstm_path)
    back = _ModelBase.load(lstm_path)
    assert np.array_equal(back.step_outputs("abc"), lstm.step_outputs("abc"))


def test_trainable_scheme_rejects_overlong_input():
    cfg = TransformerConfig(vocab=("a",), d_model=4, heads=1, layers=1, scheme="trainable", max_len=5)
    model = make_model(cfg, seed=12)
    with pytest.raises(ValueError):
        model.step_outputs("a" * 6)


def test_config_validation():
    with pytest.raises(ValueError):
        TransformerConfig(vocab=("a",), d_model=9, heads=2)
    with pytest.raises(ValueError):
        TransformerConfig(vocab=("a",), layers=5)
    with pytest.raises(ValueError):
        TransformerConfig(vocab=("a",), scheme="rotary")
    with pytest.raises(ValueError):
        LstmConfig(vocab=("a",), layers=3)


def test_parameter_count_same_order_as_reported_band():
    """Grid extremes land in the documented ~10^2..~2.5*10^4 parameter range."""
    small = make_model(TransformerConfig(vocab=("0", "1"), d_model=3, heads=1, layers=1), seed=0)
    big = make_model(TransformerConfig(vocab=("0", "1"), d_model=32, heads=4, layers=2), seed=0)
    assert 100 <= small.num_parameters() <= 400
    assert big.num_parameters() <= 30000
