"""Isolated execution of model-written analysis scripts.

Each script runs as a separate interpreter process whose audit hook denies
sockets, process spawning, ctypes, and any filesystem access outside the
staged working directory (interpreter trees stay readable; /dev/null and
/dev/urandom stay usable). Wall-clock and address-space limits are enforced
by the parent. The guard rides inside the child, so nothing about the
parent process leaks in.
"""

from __future__ import annotations

import os
import shutil
import signal
import subprocess
import sys
import tempfile
import time
from dataclasses import dataclass
from pathlib import Path

from .errors import SandboxError

DEFAULT_WALL_SECONDS = 120.0
DEFAULT_MEMORY_BYTES = 1 << 30
STREAM_CAP_BYTES = 16 * 1024
TRUNCATION_MARKER = f"\n[output truncated at {STREAM_CAP_BYTES} bytes]"


@dataclass(frozen=True)
class Limits:
    wall_seconds: float = DEFAULT_WALL_SECONDS
    memory_bytes: int = DEFAULT_MEMORY_BYTES

    def __post_init__(self):
        if self.wall_seconds <= 0:
            raise ValueError("wall_seconds must be positive")
        if self.memory_bytes < 64 << 20:
            raise ValueError("memory cap below 64 MiB is unusable")


@dataclass(frozen=True)
class ScriptResult:
    stdout: str
    stderr: str
    exit_code: int | None
    duration: float
    status: str  # ok | error | timeout

    @property
    def ok(self) -> bool:
        return self.status == "ok"


# Runs inside the child before the target script; must stay dependent only on
# the standard library and on its two argv entries (workdir, script path).
_BOOT_SOURCE = r'''
import os
import sys

WORKDIR = os.path.realpath(sys.argv[1])
SCRIPT = sys.argv[2]
HARNESS = os.path.dirname(os.path.realpath(__file__))

_READ_ROOTS = tuple(
    os.path.realpath(p) for p in {sys.prefix, sys.base_prefix, sys.exec_prefix, HARNESS}
)
_DEVICES = ("/dev/null", "/dev/urandom")
_DENIED_EVENTS = {
    "os.system",
    "os.posix_spawn",
    "os.fork",
    "os.forkpty",
    "subprocess.Popen",
}
_FILE_EVENTS = {
    "open",
    "os.remove",
    "os.unlink",
    "os.rename",
    "os.replace",
    "os.mkdir",
    "os.rmdir",
    "os.truncate",
}
_WRITE_FLAGS = os.O_WRONLY | os.O_RDWR | os.O_APPEND | os.O_CREAT | os.O_TRUNC


def _deny(event, detail=""):
    raise PermissionError("sandbox denied %s%s" % (event, detail))


def _resolve(value):
    if isinstance(value, bytes):
        value = os.fsdecode(value)
    if not isinstance(value, str):
        return None
    return os.path.realpath(value)


def _inside(path, root):
    return path == root or path.startswith(root + os.sep)


def _path_allowed(path, write):
    if path in _DEVICES:
        return True
    if _inside(path, WORKDIR):
        return True
    if not write:
        return any(_inside(path, root) for root in _READ_ROOTS)
    return False


def _write_intent(event, args):
    if event != "open":
        return True
    mode = args[1] if len(args) > 1 else None
    flags = args[2] if len(args) > 2 else None
    if isinstance(mode, str):
        return any(c in mode for c in "wax+")
    if isinstance(flags, int):
        return bool(flags & _WRITE_FLAGS)
    return True


def _guard(event, args):
    if event.startswith("socket.") or event.startswith("ctypes."):
        _deny(event)
    if event in _DENIED_EVENTS or event.startswith("os.exec") or event.startswith("os.spawn"):
        _deny(event)
    if event in _FILE_EVENTS:
        targets = args[:2] if event in ("os.rename", "os.replace") else args[:1]
        for raw in targets:
            path = _resolve(raw)
            if path is None:
                continue
            if not _path_allowed(path, _write_intent(event, args)):
                _deny(event, ": %r" % (raw,))


sys.addaudithook(_guard)

import runpy

runpy.run_path(SCRIPT, run_name="__main__")
'''


def _limit_resources(memory_bytes: int):
    import resource

    def apply():
        resource.setrlimit(resource.RLIMIT_AS, (memory_bytes, memory_bytes))
        resource.setrlimit(resource.RLIMIT_CORE, (0, 0))

    return apply


def run_script(
    code: str,
    workdir,
    limits: Limits = Limits(),
    interpreter: str | None = None,
) -> ScriptResult:
    """Execute ``code`` in a guarded child interpreter rooted at ``workdir``.

    The boot shim and the script file live in a throwaway directory outside
    the workdir so the script cannot rewrite its own guard.
    """
    workdir = Path(workdir)
    if not workdir.is_dir():
        raise SandboxError(f"workdir does not exist: {workdir}")
    interpreter = interpreter or sys.executable

    harness = Path(tempfile.mkdtemp(prefix="sandbox-harness-"))
    try:
        boot = harness / "boot.py"
        boot.write_text(_BOOT_SOURCE, encoding="utf-8")
        script = harness / "script.py"
        script.write_text(code, encoding="utf-8")

        env = {
            "PATH": os.environ.get("PATH", "/usr/bin:/bin"),
            "HOME": str(harness),
            "LC_ALL": "C.UTF-8",
            "LANG": "C.UTF-8",
        }
        started = time.monotonic()
        try:
            proc = subprocess.Popen(
                [interpreter, "-I", "-B", str(boot), str(workdir.resolve()), str(script)],
                cwd=workdir,
                stdout=subprocess.PIPE,
                stderr=subprocess.PIPE,
                env=env,
                start_new_session=True,
                preexec_fn=_limit_resources(limits.memory_bytes),
            )
        except OSError as exc:
            raise SandboxError(f"cannot launch interpreter {interpreter!r}: {exc}") from exc

        timed_out = False
        try:
            out, err = proc.communicate(timeout=limits.wall_seconds)
        except subprocess.TimeoutExpired:
            timed_out = True
            try:
                os.killpg(proc.pid, signal.SIGKILL)
            except ProcessLookupError:
                pass
            out, err = proc.communicate()
        duration = time.monotonic() - started

        if timed_out:
            status, exit_code = "timeout", None
        elif proc.returncode == 0:
            status, exit_code = "ok", 0
        else:
            status, exit_code = "error", proc.returncode
        return ScriptResult(
            stdout=_clip(out),
            stderr=_clip(err),
            exit_code=exit_code,
            duration=duration,
            status=status,
        )
    finally:
        shutil.rmtree(harness, ignore_errors=True)


def _clip(data: bytes) -> str:
    truncated = len(data) > STREAM_CAP_BYTES
    text = data[:STREAM_CAP_BYTES].decode("utf-8", errors="replace")
    return text + TRUNCATION_MARKER if truncated else text
