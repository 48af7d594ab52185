# data_snapshot.py - 计算结果快照系统
"""
把 table / verify / asympt 的结果按阶段保存为 JSON：
<log_dir>/snapshots/<session>_<stage>.json，外加一个会话摘要。
精确值一律以规范字符串保存，读回后用 parse_scalar 可还原
"""
import json
import os
import shutil
from datetime import datetime
from fractions import Fraction
from typing import Any, Dict, List, Optional

from src.exact_core import TauPoly, format_scalar
from src.logger_config import get_logger


class DataSnapshot:
    """快照管理器"""

    def __init__(self, session_id: str, base_dir: str = "debug"):
        self.session_id = session_id
        self.snapshots: Dict[str, Dict[str, Any]] = {}
        self.snapshot_dir = os.path.join(base_dir, "snapshots")
        os.makedirs(self.snapshot_dir, exist_ok=True)

        self.logger = get_logger()
        self.logger.debug("快照系统初始化", {"session_id": session_id, "dir": self.snapshot_dir})

    def _path(self, stage: str) -> str:
        return os.path.join(self.snapshot_dir, f"{self.session_id}_{stage}.json")

    def capture(self, stage: str, data: Any, metadata: Optional[Dict] = None) -> str:
        """
        保存一个阶段的数据

        Args:
            stage: 阶段名称，如 "table"、"verify"
            data: 行列表或字典
            metadata: 额外信息（命令参数等）

        Returns:
            快照文件路径，失败时为空串
        """
        self.snapshots[stage] = {
            "stage": stage,
            "timestamp": datetime.now().isoformat(),
            "metadata": metadata or {},
            "data_summary": self._summarize_data(data),
        }

        detail_file = self._path(stage)
        try:
            with open(detail_file, 'w', encoding='utf-8') as f:
                json.dump(data, f, ensure_ascii=False, indent=2, default=self._json_serializer)
        except (OSError, TypeError, ValueError) as e:
            self.logger.error(f"保存快照失败: {stage}", {"stage": stage, "data_type": type(data).__name__}, e)
            return ""

        self.logger.debug(f"快照已保存: {stage}", {
            "file_path": detail_file,
            "file_size_kb": round(os.path.getsize(detail_file) / 1024, 2),
        })
        return detail_file

    def _summarize_data(self, data: Any) -> Dict[str, Any]:
        if isinstance(data, list):
            summary: Dict[str, Any] = {"type": "list", "count": len(data)}
            if data and isinstance(data[0], dict):
                summary["sample_keys"] = list(data[0].keys())
            return summary
        if isinstance(data, dict):
            return {"type": "dict", "keys": list(data.keys())}
        return {"type": type(data).__name__}

    @staticmethod
    def _json_serializer(obj):
        if isinstance(obj, (Fraction, TauPoly)):
            return format_scalar(obj)
        if isinstance(obj, datetime):
            return obj.isoformat()
        return str(obj)

    def save_summary(self) -> str:
        """保存摘要并刷新 latest_summary.json"""
        summary_file = self._path("summary")
        summary_data = {
            "session_info": {
                "session_id": self.session_id,
                "created_at": datetime.now().isoformat(),
                "total_snapshots": len(self.snapshots),
            },
            "snapshots": self.snapshots,
        }
        try:
            with open(summary_file, 'w', encoding='utf-8') as f:
                json.dump(summary_data, f, ensure_ascii=False, indent=2)
        except OSError as e:
            self.logger.error("保存快照摘要失败", {"file": summary_file}, e)
            return ""

        self._create_symlink(summary_file, os.path.join(self.snapshot_dir, "latest_summary.json"))
        self.logger.debug("快照摘要已保存", {"file": summary_file, "stages": list(self.snapshots)})
        return summary_file

    def _create_symlink(self, target: str, link_name: str):
        try:
            if os.path.lexists(link_name):
                os.remove(link_name)
            try:
                os.symlink(os.path.basename(target), link_name)
            except (OSError, NotImplementedError):
                shutil.copy2(target, link_name)
        except OSError as e:
            self.logger.warning(f"创建软链接失败: {link_name}", {"error": str(e)})

    def load_snapshot(self, stage: str) -> Optional[Any]:
        snapshot_file = self._path(stage)
        if not os.path.exists(snapshot_file):
            self.logger.warning(f"快照文件不存在: {stage}", {"file_path": snapshot_file})
            return None
        try:
            with open(snapshot_file, 'r', encoding='utf-8') as f:
                return json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            self.logger.error(f"加载快照失败: {stage}", {"file_path": snapshot_file}, e)
            return None

    def list_snapshots(self) -> List[str]:
        prefix = f"{self.session_id}_"
        stages = []
        for filename in os.listdir(self.snapshot_dir):
            if filename.startswith(prefix) and filename.endswith('.json'):
                stage = filename[len(prefix):-5]
                if stage != "summary":
                    stages.append(stage)
        return sorted(stages)

    def compare_snapshots(self, stage1: str, stage2: str, key: str = "exact",
                          other: Optional["DataSnapshot"] = None) -> Dict[str, Any]:
        """
        逐行对比两个表格快照中 key 列的取值

        other 给出时 stage2 从另一个会话读取，用于对比两次运行的同一阶段
        """
        other = other or self
        data1 = self.load_snapshot(stage1)
        data2 = other.load_snapshot(stage2)
        if data1 is None or data2 is None:
            return {"error": "无法加载快照数据"}

        comparison: Dict[str, Any] = {
            "stage1": stage1,
            "stage2": stage2,
            "session1": self.session_id,
            "session2": other.session_id,
            "comparison_time": datetime.now().isoformat(),
        }
        if isinstance(data1, list) and isinstance(data2, list):
            changed = [
                {"row": i, "before": a.get(key), "after": b.get(key)}
                for i, (a, b) in enumerate(zip(data1, data2))
                if isinstance(a, dict) and isinstance(b, dict) and a.get(key) != b.get(key)
            ]
            comparison.update({
                "type": "list_comparison",
                "stage1_count": len(data1),
                "stage2_count": len(data2),
                "changed_rows": changed,
            })
        elif isinstance(data1, dict) and isinstance(data2, dict):
            keys1, keys2 = set(data1), set(data2)
            comparison.update({
                "type": "dict_comparison",
                "keys_added": sorted(keys2 - keys1),
                "keys_removed": sorted(keys1 - keys2),
                "changed_keys": sorted(k for k in keys1 & keys2 if data1[k] != data2[k]),
            })

        comparison["identical"] = (
            comparison.get("stage1_count") == comparison.get("stage2_count")
            and not comparison.get("changed_rows")
            and not comparison.get("keys_added")
            and not comparison.get("keys_removed")
            and not comparison.get("changed_keys")
            and "type" in comparison
        )
        self.logger.debug(f"快照对比完成: {stage1} vs {stage2}", comparison)
        return comparison


def latest_session_id(base_dir: str) -> Optional[str]:
    """latest_summary.json 指向的会话；没有摘要时返回 None"""
    summary_file = os.path.join(base_dir, "snapshots", "latest_summary.json")
    if not os.path.exists(summary_file):
        return None
    try:
        with open(summary_file, 'r', encoding='utf-8') as f:
            return json.load(f)["session_info"]["session_id"]
    except (OSError, json.JSONDecodeError, KeyError) as e:
        get_logger().warning("读取最新快照摘要失败", {"file": summary_file, "error": str(e)})
        return None


def create_snapshot_manager(session_id: Optional[str] = None, base_dir: Optional[str] = None) -> DataSnapshot:
    """默认沿用全局 logger 的 session_id 与 log_dir"""
    logger = get_logger()
    if session_id is None:
        session_id = getattr(logger, 'session_id', datetime.now().strftime("%Y%m%d_%H%M%S"))
    if base_dir is None:
        base_dir = logger.log_dir or "debug"
    return DataSnapshot(session_id, base_dir)
