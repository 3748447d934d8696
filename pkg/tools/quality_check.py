from __future__ import annotations

import argparse
import json
import shutil
import subprocess
import sys
import tempfile
import time
from dataclasses import dataclass
from pathlib import Path

SMOKE_COMMANDS = ("greens", "dipole", "couplings", "bands", "dos", "jmatrix", "wires", "trapscan", "kitaev-report")
JSON_COMMANDS = ("jmatrix", "kitaev-report")
VERSION_PREFIX = "# kitaev-sim"
REPORT_SCHEMA_PREFIX = "kitaev-sim/report/"


@dataclass(frozen=True)
class CheckStep:
    name: str
    command: list[str]
    optional: bool = False
    required_bin: str | None = None
    artifact: Path | None = None


def smoke_artifact(output_dir: str | Path, command: str) -> Path:
    suffix = ".json" if command in JSON_COMMANDS else ".csv"
    return Path(output_dir) / f"{command}{suffix}"


def build_smoke_steps(output_dir: str | Path, commands: tuple[str, ...] = SMOKE_COMMANDS) -> list[CheckStep]:
    unknown = [command for command in commands if command not in SMOKE_COMMANDS]
    if unknown:
        raise ValueError(f"unknown smoke command(s): {', '.join(unknown)}")
    steps = []
    for command in commands:
        artifact = smoke_artifact(output_dir, command)
        steps.append(
            CheckStep(
                name=f"smoke-{command}",
                command=[
                    sys.executable,
                    "main.py",
                    command,
                    "--seed-paper-defaults",
                    "--quiet",
                    "--kgrid",
                    "24",
                    "--out",
                    str(artifact),
                ],
                artifact=artifact,
            )
        )
    return steps


def build_steps(
    include_lint: bool,
    include_env_check: bool,
    smoke_dir: str | Path | None = None,
    smoke_commands: tuple[str, ...] = SMOKE_COMMANDS,
) -> list[CheckStep]:
    steps = [
        CheckStep(name="compile", command=[sys.executable, "-m", "compileall", "-q", "-x", "examples", "."]),
        CheckStep(name="tests", command=[sys.executable, "-m", "pytest", "-q", "tests"]),
    ]
    if include_lint:
        steps.append(CheckStep(name="ruff", command=["ruff", "check", "."], optional=True, required_bin="ruff"))
    if include_env_check:
        steps.append(CheckStep(name="pip-check", command=[sys.executable, "-m", "pip", "check"]))
    if smoke_dir is not None:
        steps.extend(build_smoke_steps(smoke_dir, smoke_commands))
    return steps


def verify_artifact(path: Path) -> str | None:
    """Problem with a smoke output, or None when it is self-describing."""
    if not path.exists():
        return f"{path.name} was not written"
    text = path.read_text(encoding="utf-8")
    if path.suffix == ".csv":
        if not text.startswith(VERSION_PREFIX):
            return f"{path.name} lacks the version stamp"
        if not any(line and not line.startswith("#") for line in text.splitlines()):
            return f"{path.name} has no table body"
        return None
    try:
        document = json.loads(text)
    except json.JSONDecodeError as exc:
        return f"{path.name} is not JSON: {exc.msg}"
    if not str(document.get("schema", "")).startswith(REPORT_SCHEMA_PREFIX):
        return f"{path.name} has no report schema"
    if "units" not in document:
        return f"{path.name} has no units"
    return None


def run_step(step: CheckStep, cwd: Path) -> tuple[bool, float]:
    if step.required_bin and shutil.which(step.required_bin) is None:
        state = "skip" if step.optional else "fail"
        print(f"[{state}] {step.name}: missing `{step.required_bin}`")
        return step.optional, 0.0

    started = time.perf_counter()
    print(f"[run] {step.name}: {' '.join(step.command)}")
    proc = subprocess.run(step.command, cwd=str(cwd))
    elapsed = time.perf_counter() - started

    if proc.returncode != 0:
        print(f"[fail] {step.name} exited with {proc.returncode} ({elapsed:.2f}s)")
        return False, elapsed
    if step.artifact is not None:
        problem = verify_artifact(step.artifact)
        if problem:
            print(f"[fail] {step.name}: {problem}")
            return False, elapsed

    print(f"[ok] {step.name} ({elapsed:.2f}s)")
    return True, elapsed


def parse_only(value: str | None) -> tuple[str, ...]:
    if not value:
        return SMOKE_COMMANDS
    return tuple(part.strip() for part in value.split(",") if part.strip())


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description="Run project quality checks.")
    parser.add_argument("--lint", action="store_true", help="Run lint check (ruff) when installed.")
    parser.add_argument("--env-check", action="store_true", help="Run dependency consistency check (pip check).")
    parser.add_argument("--smoke", action="store_true", help="Run CLI subcommands with the published defaults.")
    parser.add_argument("--only", default=None, help="Comma-separated subset of subcommands for --smoke.")
    args = parser.parse_args(argv)

    repo_root = Path(__file__).resolve().parent.parent
    timings: list[tuple[str, float]] = []
    with tempfile.TemporaryDirectory() as smoke_dir:
        try:
            steps = build_steps(
                include_lint=args.lint,
                include_env_check=args.env_check,
                smoke_dir=smoke_dir if args.smoke else None,
                smoke_commands=parse_only(args.only),
            )
        except ValueError as exc:
            print(f"[error] {exc}")
            return 2
        for step in steps:
            passed, elapsed = run_step(step, cwd=repo_root)
            timings.append((step.name, elapsed))
            if not passed:
                return 1

    slowest = max(timings, key=lambda item: item[1])
    print(f"[done] {len(timings)} checks passed ({sum(t for _, t in timings):.2f}s, slowest {slowest[0]})")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
