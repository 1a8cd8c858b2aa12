import json
import os

import numpy as np
import pytest

from manifold_l1 import cmm
from manifold_l1 import colour
from manifold_l1 import config
from manifold_l1 import config_types
from manifold_l1 import errors
from manifold_l1 import irls
from manifold_l1 import log
from manifold_l1 import options
from manifold_l1 import spectral
from manifold_l1 import utils


def test_int_val():
    intval = config_types.IntVal()
    assert intval.get_param_value('12') == 12
    assert intval.get_param_value('1e3') == 1000
    assert intval.normalize_param_string(' 7 ') == '7'
    with pytest.raises(ValueError):
        intval.get_param_value('1.5')
    with pytest.raises(ValueError):
        intval.get_param_value(None)
    assert config_types.IntVal(nullable=True).get_param_value('None') is None


def test_positive_types():
    with pytest.raises(ValueError):
        config_types.PositiveIntVal().get_param_value('0')
    with pytest.raises(ValueError):
        config_types.PositiveFloatVal().get_param_value('0')
    with pytest.raises(ValueError):
        config_types.NonNegativeFloatVal().get_param_value('-1e-3')
    assert config_types.NonNegativeFloatVal().get_param_value('0') == 0.0


def test_float_val_keeps_precision():
    floatval = config_types.FloatVal()
    val = 0.1+0.2
    assert floatval.get_param_value(floatval.normalize_param_string(val)) == val


def test_bool_val():
    boolval = config_types.BoolVal()
    for valstr in ('true', 'Y', 'yes', '1'):
        assert boolval.get_param_value(valstr) is True
    for valstr in ('False', 'n', 'NO', '0'):
        assert boolval.get_param_value(valstr) is False
    with pytest.raises(ValueError):
        boolval.get_param_value('maybe')


def test_choice_val():
    cfgtype = config_types.ChoiceVal('Alpha', 'beta')
    assert cfgtype.choices == ('alpha', 'beta')
    assert cfgtype().get_param_value('ALPHA') == 'alpha'
    with pytest.raises(ValueError):
        cfgtype().get_param_value('gamma')


def _configurations():
    configs = options.Configurations()
    configs.add_param('count', config_types.IntVal, aliases=['n'])
    configs.add_param('name', config_types.StrVal, nullable=True)
    return configs


def test_configurations():
    configs = _configurations()
    configs.set_from_string('n=3, name=abc')
    assert configs['count'] == 3
    assert configs['n'] == 3
    assert configs.count == 3
    assert configs.to_string() == 'count=3,name=abc'
    configs['name'] = 'None'
    assert configs.name is None
    assert configs.to_dict() == {'count': 3, 'name': None}


def test_configurations_errors():
    configs = _configurations()
    with pytest.raises(errors.ConfigurationError):
        configs.set_from_string('bogus=1')
    with pytest.raises(errors.ConfigurationError):
        configs.set_from_string('count')
    with pytest.raises(errors.ConfigurationError):
        configs['count'] = 'many'
    with pytest.raises(ValueError):
        configs.add_param('n', config_types.IntVal)
    with pytest.raises(ValueError):
        configs.add_param('other', int)


def test_configurable_precedence():
    opts = irls.IRLSOptions('mu=2,scheme=first', mu=3)
    assert opts.mu == 3.0
    assert opts.scheme == 'first'
    assert opts.max_outer_iters == 100
    assert 'mu=3.0' in opts.get_config_string()
    assert opts.replace(mu=4).mu == 4.0
    assert opts.mu == 3.0
    with pytest.raises(errors.ConfigurationError):
        opts.no_such_parameter


def test_configurable_help():
    helpstr = cmm.CMMOptions().get_help(full=True)
    for key in ('k', 'mu', 'beta_override', 'support_tau'):
        assert key in helpstr


def test_options_defaults():
    opts = cmm.CMMOptions()
    assert opts.k == 8
    assert opts.beta_override is None
    assert opts.beta_factor == 10.0
    spec_opts = spectral.SpectralOptions('solver=dense', seed=5)
    assert spec_opts.solver == spectral.DENSE
    assert spec_opts.seed == 5
    with pytest.raises(errors.ConfigurationError):
        spectral.SpectralOptions('solver=cholmod')


def test_config_overrides():
    default = config.cfg.dense_limit
    config.cfg.set_override_config('dense_limit', 7)
    assert config.cfg.dense_limit == 7
    assert config.cfg['dense_limit'] == 7
    config.cfg.clear_overrides()
    assert config.cfg.dense_limit == default
    with pytest.raises(errors.ConfigurationError):
        config.cfg.no_such_configuration


def test_config_read_file(tmp_path):
    cfgfn = tmp_path/"extra.cfg"
    cfgfn.write_text("dense_limit = 12\n")
    cfgdict = config.read_file(str(cfgfn))
    assert cfgdict == {'dense_limit': 12}
    assert config.read_file(str(tmp_path/"missing.cfg")) == {}
    with pytest.raises(ValueError):
        config.read_file(str(tmp_path/"missing.cfg"), required=True)
    assert (cfgdict + {'pivot_rtol': 1.0})['pivot_rtol'] == 1.0


def test_to_json():
    text = utils.to_json({'b': np.float64(1.5), 'a': np.arange(3),
                          'c': np.int32(2), 'd': np.bool_(True)})
    assert text.index('"a"') < text.index('"b"')
    assert json.loads(text) == {'a': [0, 1, 2], 'b': 1.5, 'c': 2, 'd': True}
    with pytest.raises(TypeError):
        utils.to_json({'x': object()})


def test_report_header():
    header = utils.report_header('norm', {'scheme': 'first'})
    assert header['command'] == 'norm'
    assert header['config'] == {'scheme': 'first'}
    assert header['format_version'] == config.cfg.format_version
    assert 'version' in header


def test_md5sum():
    arr = np.arange(6, dtype=float)
    assert utils.get_md5sum(arr) == utils.get_md5sum(arr.copy())
    assert utils.get_md5sum(arr) != utils.get_md5sum(arr.reshape(2, 3))
    assert utils.get_md5sum(arr) != utils.get_md5sum(arr.astype(np.float32))


def test_cstring(monkeypatch):
    monkeypatch.setattr(config, 'colour', True)
    coloured = colour.cstring("text", 'error')
    assert coloured.startswith(colour.preset_codes['error'])
    assert coloured.endswith(colour.RESET_CODE)
    assert colour.cstring(3, 'bold') == "\033[1m3" + colour.RESET_CODE
    with pytest.raises(ValueError):
        colour.cstring("text", 'purple')
    monkeypatch.setattr(config, 'colour', False)
    assert colour.cstring("text", 'error') == "text"


def test_error_messages(monkeypatch):
    monkeypatch.setattr(config, 'colour', True)
    exc = errors.DimensionMismatch("lengths differ", logit=False)
    assert isinstance(exc, errors.ManifoldL1Error)
    assert exc.get_message() == "lengths differ"
    assert str(exc) != "lengths differ"
    exc = errors.NoConvergence("stalled", iterations=7, residual=0.5)
    assert exc.iterations == 7
    assert exc.residual == 0.5


def test_logged_errors(tmp_path):
    logfn = str(tmp_path/"errors.log")
    log.setup_logger(logfn, 'modes')
    try:
        errors.InputError("bad input")
        errors.InputError("quiet input", logit=False)
        utils.log_message("a note")
    finally:
        log.disconnect_logger()
    with open(logfn) as ff:
        text = ff.read()
    assert "ERROR" in text and "bad input" in text
    assert "quiet input" not in text
    assert "test_logged_errors" in text
    assert "manifold_l1[%d] modes" % os.getpid() in text
