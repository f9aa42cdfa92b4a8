import pytest

from ultraconv.config import RunConfig, load_config, parse_config
from ultraconv.errors import UsageError


def test_defaults_round_trip():
    c = RunConfig()
    assert parse_config(c.to_text()) == c


def test_sections():
    c = parse_config("""
        # sequence
        seq.generator=gevrey
        seq.sigma=2
        seq.pmax=128
        upoly.q=3
        grid.N=4096
        tol.delta=1e-7
        output.dir=out
        run.seed=7
    """)
    assert c.seq.generator == "gevrey" and c.seq.sigma == 2.0 and c.pmax == 128
    assert c.upoly.q == 3 and c.grid.N == 4096 and c.tol.delta == 1e-7
    assert c.output_dir == "out" and c.seed == 7
    assert c.sequence().p_max == 128
    assert parse_config(c.to_text()) == c


@pytest.mark.parametrize("text", [
    "foo.bar=1",
    "upoly.zzz=1",
    "seq.generator=gevrey\nseq.bogus=1",
    "tol.kernel=0",
    "tol.pair=-1e-8",
    "tol.delta=nan",
    "grid.N=abc",
    "grid.x_max=0",
    "justtext",
    "tol.delta=1e-6\ntol.delta=1e-7",
])
def test_rejections(text):
    with pytest.raises(UsageError):
        parse_config(text)


def test_missing_file(tmp_path):
    with pytest.raises(UsageError):
        load_config(str(tmp_path / "none.cfg"))
    assert load_config(None) == RunConfig()
