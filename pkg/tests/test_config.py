"""Config parsing and validation tests."""
import pytest

from hybridsea.config import BodyConfig, PatchConfig, SimConfig, dump_config, parse_config
from hybridsea.errors import ConfigError


class TestParse:
    def test_defaults_are_valid(self):
        SimConfig().validate()

    def test_scalar_overrides(self):
        cfg = parse_config("spectrum.u10 = 7.5\nsim.dt = 0.02\nfft.n = 128\n")
        assert cfg.u10 == 7.5 and cfg.dt == 0.02 and cfg.fft_n == 128

    def test_comments_and_blanks(self):
        cfg = parse_config("# hello\n\nspectrum.u10 = 3\n")
        assert cfg.u10 == 3.0

    def test_patch_and_body_sections(self):
        text = """
        patch.0.origin = 10,20
        patch.0.size = 50,40
        patch.0.res = 129
        patch.0.margin = 5
        body.0.position = 30,30,0
        body.0.size = 2,1,0.5
        body.0.density = 400
        """
        cfg = parse_config(text)
        assert cfg.patches == (PatchConfig(origin=(10.0, 20.0), size=(50.0, 40.0),
                                           res=129, margin=5.0),)
        assert cfg.bodies == (BodyConfig(position=(30.0, 30.0, 0.0),
                                         size=(2.0, 1.0, 0.5), density=400.0),)

    def test_no_patches(self):
        cfg = parse_config("patch.count = 0\nsim.mode = fft-only\n")
        assert cfg.patches == ()

    def test_unknown_key_reports_line(self):
        with pytest.raises(ConfigError, match="line 2.*unknown key"):
            parse_config("spectrum.u10 = 5\nspectrum.wind = 4\n")

    def test_bad_value_reports_key(self):
        with pytest.raises(ConfigError, match="fft.n"):
            parse_config("fft.n = many\n")

    def test_bad_tuple_arity(self):
        with pytest.raises(ConfigError, match="expected 3"):
            parse_config("body.0.position = 1,2\n")

    def test_missing_equals(self):
        with pytest.raises(ConfigError, match="line 1"):
            parse_config("spectrum.u10 5\n")


class TestValidate:
    @pytest.mark.parametrize("text,match", [
        ("sim.dt = 0.5\n", "sim.dt"),
        ("sim.dt = 0\n", "sim.dt"),
        ("sim.mode = turbo\n", "sim.mode"),
        ("fft.n = 100\n", "fft.n"),
        ("spectrum.u10 = -4\n", "u10"),
        ("patch.0.margin = 60\npatch.0.size = 100,100\n", "margin"),
        ("patch.0.res = 1\npatch.0.margin = 10\npatch.0.size = 100,100\n", "res"),
    ])
    def test_rejects(self, text, match):
        with pytest.raises(ConfigError, match=match):
            parse_config(text)

    def test_track_body_reference_checked(self):
        with pytest.raises(ConfigError, match="track_body"):
            parse_config("patch.0.track_body = 0\npatch.0.size = 100,100\n"
                         "patch.0.margin = 10\n")


class TestRoundTrip:
    def test_dump_parse_identity(self):
        cfg = parse_config("""
        spectrum.u10 = 8
        sim.mode = wp-only
        sim.dt = 0.05
        patch.0.origin = 0,0
        patch.0.size = 500,500
        patch.0.res = 1024
        patch.0.margin = 20
        body.0.position = 250,250,0
        body.0.size = 2,2,1
        """)
        again = parse_config(dump_config(cfg))
        assert again == cfg

    def test_dump_mentions_every_scalar(self):
        text = dump_config(SimConfig())
        for key in ("spectrum.u10", "sim.dt", "fft.n", "output.dir", "stream.port"):
            assert key in text
