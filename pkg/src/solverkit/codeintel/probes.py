"""Ready-to-paste runtime probe snippets.

Generated snippets are inserted at KeyError/AttributeError sites to print
the available keys or attributes, the object's type, and near-miss name
suggestions. The snippet must run cleanly whenever the named variable
exists, so it only uses guarded stdlib calls.
"""

from __future__ import annotations

from ..errors import InvalidIdentifierError, PreconditionError

ERROR_KINDS = ("key-error", "attribute-error")

_KEY_TEMPLATE = '''\
# probe: inspect available keys on {var}
import difflib as _difflib
_obj = {var}
print("type:", type(_obj).__name__)
try:
    _keys = sorted(map(str, _obj.keys()))
except AttributeError:
    _keys = sorted(map(str, _obj)) if hasattr(_obj, "__iter__") else []
print("available keys:", _keys)
_wanted = {wanted!r}
if _wanted:
    print("closest to", _wanted, ":",
          _difflib.get_close_matches(_wanted, _keys, n=3, cutoff=0.0))
'''

_ATTR_TEMPLATE = '''\
# probe: inspect available attributes on {var}
import difflib as _difflib
_obj = {var}
print("type:", type(_obj).__name__)
_attrs = sorted(a for a in dir(_obj) if not a.startswith("_"))
print("available attributes:", _attrs)
_wanted = {wanted!r}
if _wanted:
    print("closest to", _wanted, ":",
          _difflib.get_close_matches(_wanted, _attrs, n=3, cutoff=0.0))
'''


def runtime_probe_snippet(
    error_kind: str,
    variable_name: str,
    key_or_attr: str | None = None,
) -> str:
    if error_kind not in ERROR_KINDS:
        raise PreconditionError(f"error_kind must be one of {ERROR_KINDS}")
    if not variable_name.isidentifier():
        raise InvalidIdentifierError(f"{variable_name!r} is not a valid identifier")
    template = _KEY_TEMPLATE if error_kind == "key-error" else _ATTR_TEMPLATE
    return template.format(var=variable_name, wanted=key_or_attr or "")
