"""
The 'helpers' module provides various helper functions.
"""

import math
import os

import numpy as np

SUPPORTED_FORMATS = ["CSV", "JSON"]


def get_extension(path):
    """
    Returns the upper case file extension of a file
    referenced by a passed *path*.
    """
    ext = os.path.splitext(path)[1][1:]
    ext = ext.upper()
    return ext


def get_format_for_file_type(file_type):
    """
    Checks whether a provided file_type is one of the supported
    output formats.

    Returns either the identified format or CSV as the fallback format.
    """
    out_format = (file_type or "").upper()
    if out_format not in SUPPORTED_FORMATS:
        out_format = "CSV"
    return out_format


def output_path(out_dir, name, file_type):
    """
    Joins *out_dir* and *name* and appends the extension of the
    requested format if *name* does not carry it yet.
    """
    out_format = get_format_for_file_type(file_type)
    file_path = os.path.join(out_dir, name)
    if get_extension(file_path) != out_format:
        file_path += ".%s" % out_format.lower()
    return file_path


def ensure_dir(path):
    """
    Creates the directory *path* including parents and returns it.
    """
    if path and not os.path.isdir(path):
        os.makedirs(path)
    return path


def to_builtin(value):
    """
    Converts numpy scalars, arrays and containers of them into plain
    Python objects the json module can serialize. Non-finite floats
    are written as strings.
    """
    if isinstance(value, dict):
        return {str(key): to_builtin(val) for key, val in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_builtin(val) for val in value]
    if isinstance(value, np.ndarray):
        return [to_builtin(val) for val in value.tolist()]
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, complex):
        return [to_builtin(value.real), to_builtin(value.imag)]
    if isinstance(value, float) and not math.isfinite(value):
        return str(value)
    return value
