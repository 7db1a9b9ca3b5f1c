import pytest

from specblend.bench import attention_flops, bench_attention, grid_for
from specblend.errors import ParameterError


def test_pass_counts_long():
    r = bench_attention(frames=128, dim=4, spatial=4, window=16, stride=8, repetitions=1)
    assert r.passes == {"direct": 1, "sliding_window": 15, "freelong": 1}
    assert r.attention_evaluations == {"direct": 1, "sliding_window": 15, "freelong": 2}
    assert all(t > 0 for t in r.seconds.values())


def test_single_window_is_one_pass():
    r = bench_attention(frames=16, dim=4, spatial=4, window=16, stride=8, repetitions=1)
    assert r.passes["sliding_window"] == 1
    assert r.flops["sliding_window"] == r.flops["direct"]


def test_flop_formula():
    # projection 3*n*d^2 and attention 2*n*keys*d multiply-adds per sequence
    assert attention_flops(1, 4, 2) == 2 * (3 * 4 * 4 + 2 * 4 * 4 * 2)
    assert attention_flops(2, 4, 2, band=3) == 2 * 2 * (3 * 4 * 4 + 2 * 4 * 3 * 2)


@pytest.mark.parametrize("spatial,grid", [(256, (16, 16)), (12, (3, 4)), (7, (1, 7))])
def test_grid_for(spatial, grid):
    assert grid_for(spatial) == grid


def test_guards():
    with pytest.raises(ParameterError):
        bench_attention(repetitions=0)
    with pytest.raises(ParameterError):
        bench_attention(frames=512, dim=256, spatial=256)
    with pytest.raises(ParameterError):
        bench_attention(frames=8, window=16)
