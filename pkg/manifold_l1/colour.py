"""
Colour (colour.py)

Colourize console output of the manifold_l1 tools. Colours are
only applied when the 'colour' configuration is on.
"""
from manifold_l1 import config

RESET_CODE = "\033[0m"

# Styles used for console messages
preset_codes = {"infohdr": "\033[1;34m",
                "info": "\033[2;36m",
                "warning": "\033[1;33m",
                "error": "\033[1;31m",
                "bold": "\033[1m"}


def cstring(s, preset):
    """Return the string s wrapped in the colour codes of 'preset'.
    """
    if not config.colour:
        return s
    try:
        code = preset_codes[preset]
    except KeyError:
        raise ValueError("Unrecognized colour preset '%s'. Known presets: %s" %
                         (preset, ", ".join(sorted(preset_codes))))
    return code + str(s) + RESET_CODE


def cprint(s, preset):
    print(cstring(s, preset))
