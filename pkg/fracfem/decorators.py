from __future__ import annotations

import logging
import time
from datetime import datetime
from functools import wraps
from typing import Callable


def log_action(action: str, verbose: bool = False) -> Callable:
    act = str(action).strip().upper()
    logger = logging.getLogger("fracfem.actions")

    def decorator(func: Callable) -> Callable:
        @wraps(func)
        def wrapper(*args, **kwargs):
            ts = datetime.now().replace(microsecond=0).isoformat()
            cfg = kwargs.get("cfg", args[0] if args else None)
            example = kwargs.get("example", getattr(cfg, "example", None))
            method = kwargs.get("method", getattr(cfg, "method", None))
            alpha = kwargs.get("alpha", getattr(cfg, "alphas", None))
            t = kwargs.get("t", kwargs.get("t_end", getattr(cfg, "times", None)))

            def _fmt(name: str, value) -> str:
                if value is None:
                    return f"{name}=?"
                if isinstance(value, (list, tuple)):
                    return f"{name}=" + ",".join(f"{v:g}" if isinstance(v, float) else str(v) for v in value)
                if isinstance(value, float):
                    return f"{name}={value:g}"
                return f"{name}={value}"

            context = " ".join([_fmt("example", example), _fmt("method", method), _fmt("alpha", alpha), _fmt("t", t)])
            started = time.perf_counter()
            try:
                result = func(*args, **kwargs)
                elapsed = time.perf_counter() - started

                extra = ""
                if verbose and isinstance(result, (list, tuple)):
                    rows = sum(len(getattr(r, "rows", ())) for r in result)
                    extra = f" tables={len(result)} rows={rows}"

                logger.info(f"{ts} {act} {context} result=OK elapsed={elapsed:.2f}s{extra}")
                return result
            except Exception as e:
                err_type = type(e).__name__
                err_msg = str(e).replace("\n", " ").strip()
                logger.info(f"{ts} {act} {context} result=ERROR error_type={err_type} error_message='{err_msg}'")
                raise

        return wrapper

    return decorator
