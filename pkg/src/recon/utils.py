"""Small shared utilities: thread cap, deterministic JSON with %.17g floats."""

import math
import os
import tempfile


def n_threads():
    """Worker cap from the RECON_THREADS environment variable (default 1)."""
    try:
        return max(1, int(os.environ.get("RECON_THREADS", "1")))
    except ValueError:
        return 1


def _format_float(x):
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    return format(x, ".17g")


def _encode(obj, indent, level):
    pad = " " * (indent * level)
    pad_in = " " * (indent * (level + 1))
    if obj is None:
        return "null"
    if obj is True:
        return "true"
    if obj is False:
        return "false"
    if isinstance(obj, str):
        import json

        return json.dumps(obj)
    if isinstance(obj, float):
        return _format_float(obj)
    if isinstance(obj, int):
        return str(obj)
    if hasattr(obj, "item") and not isinstance(obj, (list, tuple, dict)):
        return _encode(obj.item(), indent, level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [
            f'{pad_in}{_encode(str(k), indent, 0)}: {_encode(v, indent, level + 1)}'
            for k, v in obj.items()
        ]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)) or hasattr(obj, "tolist"):
        seq = obj.tolist() if hasattr(obj, "tolist") else list(obj)
        if not seq:
            return "[]"
        items = [f"{pad_in}{_encode(v, indent, level + 1)}" for v in seq]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps_17g(obj, indent=2):
    """JSON text with every float printed at %.17g (byte-stable per input)."""
    return _encode(obj, indent, 0)


def write_text_atomic(path, text):
    """Write via a temp file in the same directory, then rename."""
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", text=True)
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json_atomic(path, obj):
    write_text_atomic(path, dumps_17g(obj) + "\n")
