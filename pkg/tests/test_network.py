import numpy as np
import pytest

from gaze9.network import GazeNet, ModelConfig
from gaze9.nn import softmax_cross_entropy_batch

from _oracles import fd_gradient, rel_err

# Per-layer shape arithmetic, frozen by hand:
#   conv1 3*3*3*64+64            = 1792
#   conv2 = conv3 3*3*64*64+64   = 36928
#   bn gamma+beta, 3 layers      = 3*128 = 384
#   fc1 4096*300+300             = 1229100   (2048*300+300 = 614700 for W=64)
#   fc2 300*10+10                = 3010
PARAM_COUNT_W128 = 1792 + 36928 + 36928 + 384 + 1229100 + 3010  # 1308142
PARAM_COUNT_W64 = 1792 + 36928 + 36928 + 384 + 614700 + 3010    # 693742


def test_parameter_count_double_eye():
    net = GazeNet(ModelConfig(width=128))
    assert net.config.feature_size == 4096
    assert net.fc1.w.shape == (4096, 300)
    assert net.param_count() == PARAM_COUNT_W128 == 1308142


def test_parameter_count_single_eye():
    net = GazeNet(ModelConfig(width=64))
    assert net.config.feature_size == 2048
    assert net.fc1.w.shape == (2048, 300)
    assert net.param_count() == PARAM_COUNT_W64 == 693742


def test_layer_output_shapes():
    net = GazeNet(ModelConfig(width=128))
    x = np.zeros((2, 32, 128, 3), dtype=np.float32)
    h = x
    shapes = []
    for layer in net.layers:
        h = layer.forward(h, train=False)
        shapes.append(h.shape)
    # conv/bn/relu keep the spatial size, each pool halves it
    assert shapes[3] == (2, 16, 64, 64)
    assert shapes[7] == (2, 8, 32, 64)
    assert shapes[11] == (2, 4, 16, 64)
    logits = net.forward(x, train=False)
    assert logits.shape == (2, 10)


def test_same_seed_same_weights():
    a = GazeNet(ModelConfig(width=64), seed=42)
    b = GazeNet(ModelConfig(width=64), seed=42)
    for (_, pa, _), (_, pb, _) in zip(a.parameters(), b.parameters()):
        assert np.array_equal(pa, pb)
    c = GazeNet(ModelConfig(width=64), seed=43)
    assert not np.array_equal(a.layers[0].w, c.layers[0].w)


def test_width_must_divide_by_eight():
    with pytest.raises(ValueError):
        ModelConfig(width=100)


def test_wrong_input_size_rejected():
    net = GazeNet(ModelConfig(width=64))
    with pytest.raises(ValueError):
        net.forward(np.zeros((1, 32, 128, 3), dtype=np.float32))


def tiny_net(seed):
    return GazeNet(ModelConfig(width=16, height=8, filters=2, hidden=4),
                   seed=seed, dtype=np.float64)


@pytest.mark.parametrize("seed", [0, 1, 2, 3, 4])
def test_tiny_network_end_to_end_gradient_check(seed):
    """Full-network analytic gradients vs central differences, 5 seeds."""
    rng = np.random.default_rng(100 + seed)
    x = rng.uniform(size=(2, 8, 16, 3))
    labels = rng.integers(0, 10, size=2)

    net = tiny_net(seed)
    logits = net.forward(x, train=True)
    _, _, dlogits = softmax_cross_entropy_batch(logits, labels)
    dx = net.backward(dlogits)

    def loss_at(xv):
        n = tiny_net(seed)
        lo = n.forward(xv, train=True)
        return softmax_cross_entropy_batch(lo, labels)[0]

    num_dx = fd_gradient(loss_at, x, 1e-5)
    assert rel_err(dx, num_dx) < 1e-4

    # spot-check parameter gradients on the cheapest tensors of each kind
    params = {name: (p, g) for name, p, g in net.parameters()}
    for name in ["conv1.b", "bn2.gamma", "bn3.beta", "fc2.w", "fc2.b", "conv3.b"]:
        p, g = params[name]

        def loss_wrt(pv, _name=name):
            n = tiny_net(seed)
            target = {nm: pp for nm, pp, _ in n.parameters()}[_name]
            target[...] = pv
            lo = n.forward(x, train=True)
            return softmax_cross_entropy_batch(lo, labels)[0]

        assert rel_err(g, fd_gradient(loss_wrt, p.copy(), 1e-5)) < 1e-4, name
