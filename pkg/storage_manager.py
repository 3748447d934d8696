import io
import json
import logging
import math
import shutil
import time
from pathlib import Path

import numpy as np
import pandas as pd

TOOL_VERSION = "kitaev-sim 0.1.0"
REPORT_SCHEMA = "kitaev-sim/report/v1"


def _to_builtin(value: object) -> object:
    if isinstance(value, dict):
        return {str(_to_builtin(key)): _to_builtin(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_to_builtin(item) for item in value]
    if isinstance(value, np.ndarray):
        return _to_builtin(value.tolist())
    if isinstance(value, (np.bool_,)):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (np.floating, float)):
        number = float(value)
        if math.isinf(number):
            return "inf" if number > 0 else "-inf"
        if math.isnan(number):
            return None
        return number
    if hasattr(value, "value") and isinstance(getattr(value, "value"), str):
        return value.value
    return value


class ResultStorageManager:
    def __init__(self, output_path: str, verbose: bool = True):
        self.output_path = Path(output_path)
        self.verbose = verbose
        self.logger = logging.getLogger(self.__class__.__name__)

    def save_table(self, frame: pd.DataFrame, units: dict[str, str] | None = None, meta: dict | None = None) -> Path:
        """CSV body preceded by '#' lines with the version stamp, units and run metadata."""
        lines = [f"# {TOOL_VERSION}"]
        for column, unit in (units or {}).items():
            lines.append(f"# unit {column}: {unit}")
        for key, value in sorted((meta or {}).items()):
            lines.append(f"# {key}: {json.dumps(_to_builtin(value), sort_keys=True)}")

        buffer = io.StringIO()
        frame.to_csv(buffer, index=False, float_format="%.12g", lineterminator="\n")
        text = "\n".join(lines) + "\n" + buffer.getvalue()
        self._write_text(text)
        if self.verbose:
            self.logger.info(f"saved {len(frame)} rows to {self.output_path}")
        return self.output_path

    def save_report(self, payload: dict, units: dict[str, str] | None = None) -> Path:
        document = {"schema": REPORT_SCHEMA, "version": TOOL_VERSION, "units": units or {}}
        document.update(payload)
        text = json.dumps(_to_builtin(document), indent=2, sort_keys=True) + "\n"
        self._write_text(text)
        if self.verbose:
            self.logger.info(f"saved report to {self.output_path}")
        return self.output_path

    @staticmethod
    def read_table(path: str | Path) -> pd.DataFrame:
        return pd.read_csv(path, comment="#")

    @staticmethod
    def read_report(path: str | Path) -> dict:
        return json.loads(Path(path).read_text(encoding="utf-8"))

    def _write_text(self, text: str) -> None:
        self.output_path.parent.mkdir(parents=True, exist_ok=True)
        if self.output_path.exists():
            self._rotate_backups()

        tmp_path = self.output_path.with_name(f"{self.output_path.stem}.tmp{self.output_path.suffix}")
        for attempt in range(3):
            try:
                tmp_path.write_text(text, encoding="utf-8")
                tmp_path.replace(self.output_path)
                return
            except PermissionError:
                if attempt < 2:
                    self.logger.warning(f"file permission error, retrying in 2s... ({attempt + 1}/3)")
                    time.sleep(2)
                else:
                    self.logger.error(f"failed to write {self.output_path} due to permission error")
                    raise
            finally:
                if tmp_path.exists():
                    tmp_path.unlink(missing_ok=True)

    def _rotate_backups(self) -> None:
        suffix = self.output_path.suffix
        bak1 = self.output_path.with_suffix(f"{suffix}.bak.1")
        bak2 = self.output_path.with_suffix(f"{suffix}.bak.2")
        bak3 = self.output_path.with_suffix(f"{suffix}.bak.3")

        try:
            if bak2.exists():
                shutil.move(str(bak2), str(bak3))
            if bak1.exists():
                shutil.move(str(bak1), str(bak2))
            shutil.copy2(self.output_path, bak1)
        except Exception as exc:
            if self.verbose:
                self.logger.warning(f"backup rotation failed: {exc.__class__.__name__}: {exc}")
