import pytest

from codecaug.codecs import parse_codec_spec
from codecaug.codecs.spec import CodecSpec
from codecaug.errors import CodecSpecError


def test_parse_plain_specs():
    spec = parse_codec_spec("ptc-mp3@32")
    assert spec.family == "ptc-mp3"
    assert spec.bitrate_kbps == 32.0
    assert spec.params == {}

    spec = parse_codec_spec("sbc@64")
    assert spec.family == "sbc" and spec.bitrate_kbps == 64.0


def test_canonical_string_round_trips():
    for text in ("ptc-mp3@32", "sbc@64", "ptc-heaac@16", "ptc-aac@48.5",
                 "sbc@64;allocation=snr;bitpool=20"):
        spec = parse_codec_spec(text)
        again = parse_codec_spec(str(spec))
        assert again == spec
        assert str(again) == str(spec)


def test_params_parse_and_validate():
    spec = parse_codec_spec("sbc@64;bitpool=20;subbands=4;blocks=8;allocation=snr")
    assert spec.params == {"bitpool": 20, "subbands": 4, "blocks": 8, "allocation": "snr"}
    spec = parse_codec_spec("ptc-aac@64;window=512;cutoff=8000")
    assert spec.params == {"window": 512, "cutoff": 8000}


def test_negative_bitrate_is_a_bitrate_error():
    with pytest.raises(CodecSpecError, match="bitrate"):
        parse_codec_spec("opus@-5")


def test_unknown_family_named_in_error():
    with pytest.raises(CodecSpecError, match="foo"):
        parse_codec_spec("foo@9")


def test_out_of_range_bitrates():
    with pytest.raises(CodecSpecError, match="range"):
        parse_codec_spec("sbc@1")
    with pytest.raises(CodecSpecError, match="range"):
        parse_codec_spec("ptc-mp3@5000")


def test_malformed_spec_strings():
    for text in ("ptc-mp3", "ptc-mp3@", "ptc-mp3@x", "sbc@64;bitpool",
                 "sbc@64;bitpool=abc"):
        with pytest.raises(CodecSpecError):
            parse_codec_spec(text)


def test_param_domains_enforced():
    cases = [
        "sbc@64;subbands=5",
        "sbc@64;blocks=10",
        "sbc@64;bitpool=1",
        "sbc@64;bitpool=251",
        "sbc@64;allocation=psycho",
        "ptc-mp3@64;window=1000",     # not a power of two
        "ptc-mp3@64;window=128",      # too short
        "ptc-mp3@64;cutoff=0",
        "sbc@64;window=1024",         # PTC-only key on SBC
        "ptc-aac@64;bitpool=30",      # SBC-only key on PTC
    ]
    for text in cases:
        with pytest.raises(CodecSpecError):
            parse_codec_spec(text)


def test_validate_direct_construction():
    CodecSpec("ptc-aac", 64.0, {}).validate()
    with pytest.raises(CodecSpecError, match="unknown codec family"):
        CodecSpec("mp3", 64.0, {}).validate()
