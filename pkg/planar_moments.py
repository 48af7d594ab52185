# planar_moments.py - 平面系综谱矩计算与校验命令行
"""
平面系综（复 / 辛）混合谱矩 M_{p1,p2,N} 的精确计算工具

核心功能：
1. compute: 单个谱矩的精确值（有理数或 τ 多项式），可选数值积分复核
2. table:   (p1, p2, N) 网格上的谱矩表
3. verify:  运行校验套件（交叉公式、闭式、渐近、数值积分）
4. asympt:  有限 N 精确值与大 N 极限系数的对照
5. limits:  Catalan / Narayana / GUE 亏格展开等厄米极限
6. formulas: 已注册公式清单
7. snapshots: 查看、对比保存的 JSON 快照

退出码：0 成功，1 校验失败或公式不一致，2 参数错误，3 数值积分不一致
"""
import argparse
import csv
import io
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from typing import Any, Dict, List, Optional

from src.asymptotics import (
    AsymptoticCoeffs,
    asymptotic_check,
    c2,
    c2_prime,
    genus_coeff,
    genus_identity_holds,
    hermitian_limit_checks,
    l1,
)
from src.complex_moments import MomentQuery, MomentResult
from src.config import apply_env_overrides, load_config, load_env_files
from src.data_snapshot import DataSnapshot, create_snapshot_manager, latest_session_id
from src.errors import (
    DomainError,
    FormulaMismatchError,
    InexactDivisionError,
    InterpolationError,
    OracleMismatchError,
    QuadratureConvergenceError,
)
from src.exact_core import TAU, binomial, format_scalar, narayana, parse_rational, set_factorial_cache_cap
from src.formula_registry import compute_moment, formula_registry
from src.logger_config import LogLevel, cleanup_logger, get_logger, init_logger
from src.numeric_oracle import QuadratureGrid, oracle_tolerance, quadrature_moment
from src.verification_suites import SUITE_CLASSES, VerificationManager
from src.weights_polys import WeightFamily, make_family

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_DOMAIN = 2
EXIT_ORACLE = 3

METHODS = ["auto", "main", "holomorphic", "cd", "appendixB", "recursive", "closed-form"]


# ---------- 参数解析 ----------

def _rational_arg(text: str) -> Fraction:
    try:
        return parse_rational(text)
    except DomainError as e:
        raise argparse.ArgumentTypeError(str(e))


def _tau_arg(text: str):
    if text.strip().lower() == "symbolic":
        return TAU
    value = _rational_arg(text)
    if not 0 <= value <= 1:
        raise argparse.ArgumentTypeError(f"τ 必须在 [0, 1] 内: {text}")
    return value


def _int_list_arg(text: str) -> List[int]:
    try:
        values = [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"需要逗号分隔的整数: {text}")
    if not values or min(values) < 1:
        raise argparse.ArgumentTypeError(f"列表必须非空且元素 ≥ 1: {text}")
    return values


def _rational_list_arg(text: str) -> List[Fraction]:
    return [_rational_arg(part) for part in text.split(",") if part.strip()]


def parse_args(argv: Optional[List[str]] = None) -> argparse.Namespace:
    """解析命令行参数"""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--log-level', choices=['production', 'normal', 'debug', 'trace'],
                        help='日志详细程度 (默认取配置文件，通常为 normal)')
    common.add_argument('--log-dir', type=str, help='日志与快照目录')
    common.add_argument('--save-debug-data', action='store_true', help='保存结构化调试数据')
    common.add_argument('--config', type=str, help='配置文件路径')
    common.add_argument('--format', choices=['text', 'json', 'csv'], help='输出格式 (默认: text)')
    common.add_argument('--threads', type=int, help='并行线程数')
    common.add_argument('--snapshot', action='store_true', help='把结果保存为 JSON 快照')

    family = argparse.ArgumentParser(add_help=False)
    family.add_argument('--family', choices=['hermite', 'laguerre', 'gegenbauer'], default='hermite')
    family.add_argument('--tau', type=_tau_arg, default=Fraction(1, 2),
                        help='非厄米参数 τ（有理数，或 symbolic 表示形式变量）')
    family.add_argument('--nu', type=_rational_arg, default=Fraction(0), help='Laguerre 参数 ν > -1')
    family.add_argument('--a', type=_rational_arg, default=Fraction(0), help='Gegenbauer 参数 a > -1')
    family.add_argument('--ensemble', choices=['complex', 'symplectic'], default='complex')

    parser = argparse.ArgumentParser(
        description='平面系综混合谱矩的精确计算与校验',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
使用模式：
  1. 单个谱矩：
     python planar_moments.py compute --family hermite --tau 1/2 --p1 1 --p2 1 --N 3

  2. 符号 τ（输出 τ 多项式）：
     python planar_moments.py compute --tau symbolic --p1 2 --p2 2 --N 2

  3. 数值积分复核：
     python planar_moments.py compute --family laguerre --tau 1/2 --nu 1 --p1 1 --p2 1 --N 3 --oracle

  4. 谱矩表 / 校验 / 渐近 / 极限：
     python planar_moments.py table --tau 1/3 --p-max 4 --N 6 --format csv
     python planar_moments.py verify --suite cross-formula
     python planar_moments.py asympt --tau 1/3 --p1 2 --p2 2 --N-list 50,100,200
     python planar_moments.py limits --check genus --p-max 6

  5. 公式清单与快照：
     python planar_moments.py formulas --name complex/cd
     python planar_moments.py table --p-max 2 --N 3 --snapshot --log-dir debug
     python planar_moments.py snapshots --log-dir debug --show table
     python planar_moments.py snapshots --log-dir debug --session <旧会话> --compare <新会话>

退出码：
  0 成功；1 校验失败 / 公式不一致 / 快照对比有差异；2 参数错误；3 数值积分不一致
        """
    )
    subparsers = parser.add_subparsers(dest='command', required=True)

    compute = subparsers.add_parser('compute', parents=[common, family], help='计算单个谱矩')
    compute.add_argument('--p1', type=int, required=True)
    compute.add_argument('--p2', type=int, required=True)
    compute.add_argument('--N', type=int, required=True)
    compute.add_argument('--method', choices=METHODS, default='auto',
                         help='auto 走一般公式并用一条独立公式复核')
    compute.add_argument('--oracle', action='store_true', help='同时给出数值积分结果')
    compute.add_argument('--tolerance', type=float, help='覆盖数值积分容差')

    table = subparsers.add_parser('table', parents=[common, family], help='输出谱矩表')
    table.add_argument('--p-max', type=int, required=True, help='0 ≤ p1, p2 ≤ p-max')
    table.add_argument('--N', type=int, help='单个 N')
    table.add_argument('--N-list', type=_int_list_arg, help='逗号分隔的 N 列表')
    table.add_argument('--method', choices=METHODS, default='main')

    verify = subparsers.add_parser('verify', parents=[common], help='运行校验套件')
    verify.add_argument('--suite', action='append', choices=sorted(SUITE_CLASSES) + ['all'],
                        help='可重复；默认 all')
    verify.add_argument('--family', choices=['hermite', 'laguerre', 'gegenbauer'],
                        help='只对该权重族做数值积分校验')

    asympt = subparsers.add_parser('asympt', parents=[common, family], help='有限 N 与极限系数对照')
    asympt.add_argument('--p1', type=int, required=True)
    asympt.add_argument('--p2', type=int, required=True)
    asympt.add_argument('--N-list', type=_int_list_arg, default=[50, 100, 200])
    asympt.add_argument('--alpha', type=_rational_arg, help='Laguerre: ν/N 的极限 α')

    limits = subparsers.add_parser('limits', parents=[common], help='厄米极限恒等式')
    limits.add_argument('--check', choices=['catalan', 'narayana', 'genus', 'c2', 'all'], default='all')
    limits.add_argument('--p-max', type=int, default=6)
    limits.add_argument('--N-max', type=int, default=20, help='亏格展开校验的 N 上限')
    limits.add_argument('--alpha-list', type=_rational_list_arg,
                        default=[Fraction(0), Fraction(1, 2), Fraction(1)])

    formulas = subparsers.add_parser('formulas', parents=[common], help='列出已注册的精确公式')
    formulas.add_argument('--name', type=str, help='只显示该公式的详细信息，如 complex/cd')

    snapshots = subparsers.add_parser('snapshots', parents=[common], help='查看与对比 JSON 快照')
    snapshots.add_argument('--session', type=str, help='会话 ID (默认: 最近一次保存摘要的会话)')
    snapshots.add_argument('--show', type=str, metavar='STAGE', help='打印该阶段的快照内容')
    snapshots.add_argument('--compare', type=str, metavar='SESSION',
                           help='与另一个会话的同一阶段逐行对比 exact 列')
    snapshots.add_argument('--stage', type=str, default='table', help='--compare 使用的阶段 (默认: table)')

    return parser.parse_args(argv)


# ---------- 输出 ----------

def _float_text(value: Optional[float]) -> str:
    return "" if value is None else repr(value)


def emit_rows(rows: List[Dict[str, Any]], fmt: str, columns: Optional[List[str]] = None):
    """按格式把行写到 stdout；CSV 首行为表头"""
    if fmt == "json":
        print(json.dumps(rows, ensure_ascii=False, indent=2))
        return
    if columns is None:
        columns = []
        for row in rows:
            columns.extend(key for key in row if key not in columns)
    if fmt == "csv":
        buffer = io.StringIO()
        writer = csv.DictWriter(buffer, fieldnames=columns, extrasaction='ignore', lineterminator='\n')
        writer.writeheader()
        for row in rows:
            writer.writerow({key: ("" if row.get(key) is None else row.get(key)) for key in columns})
        sys.stdout.write(buffer.getvalue())
        return
    print("  ".join(columns))
    for row in rows:
        print("  ".join("" if row.get(key) is None else str(row.get(key)) for key in columns))


def _snapshot(args, stage: str, data: Any, metadata: Optional[Dict] = None):
    if args.snapshot:
        snapshots = create_snapshot_manager()
        snapshots.capture(stage, data, metadata or {"command": args.command})
        snapshots.save_summary()


def build_family(args) -> WeightFamily:
    return make_family(args.family, args.tau, args.nu, args.a)


# ---------- 子命令 ----------

def _oracle_check(result: MomentResult, config: Dict[str, Any], tolerance: Optional[float]) -> Dict[str, Any]:
    query = result.query
    oracle_cfg = config["oracle"]
    grid = QuadratureGrid.from_config(oracle_cfg)
    numeric = quadrature_moment(query.family, query.p1, query.p2, query.N, query.component, grid)
    exact = result.float_value
    if exact is None:
        raise DomainError("数值积分复核需要有理 τ", query.describe())
    tol = tolerance if tolerance is not None else oracle_tolerance(query.family, oracle_cfg["tolerance"])
    error = abs(numeric - exact) / max(1.0, abs(exact))
    record = {"value": numeric, "error": error, "tolerance": tol}
    if error > tol:
        raise OracleMismatchError(f"数值积分与精确值不一致: {numeric!r} vs {exact!r}",
                                  dict(query.describe(), **record))
    return record


def cmd_compute(args, config: Dict[str, Any]) -> int:
    family = build_family(args)
    query = MomentQuery(family, args.p1, args.p2, args.N, args.ensemble, args.method)
    result = compute_moment(query, config["cli"]["auto_crosscheck_max_order"])
    record = result.to_dict()
    oracle = _oracle_check(result, config, args.tolerance) if args.oracle else None
    if oracle:
        record["oracle"] = oracle

    fmt = args.format
    if fmt == "json":
        print(json.dumps(record, ensure_ascii=False, indent=2))
    elif fmt == "csv":
        row = {"p1": args.p1, "p2": args.p2, "N": args.N, "exact": result.exact,
               "float": _float_text(result.float_value)}
        columns = ["p1", "p2", "N", "exact", "float"]
        if oracle:
            row["oracle"] = repr(oracle["value"])
            columns.append("oracle")
        emit_rows([row], "csv", columns)
    else:
        rendered = result.exact
        if result.float_value is not None and not family.symbolic:
            rendered = f"{rendered} ({result.float_value!r})"
        print(rendered)
        if oracle:
            print(f"oracle: {oracle['value']!r} (relative error {oracle['error']:.3e})")
    _snapshot(args, "compute", record)
    return EXIT_OK


def cmd_table(args, config: Dict[str, Any]) -> int:
    if args.p_max < 0:
        raise DomainError("p-max 必须 ≥ 0", {"p_max": args.p_max})
    n_values = args.N_list or ([args.N] if args.N else None)
    if not n_values:
        raise DomainError("需要 --N 或 --N-list")
    family = build_family(args)
    cells = [(p1, p2, n) for n in n_values for p1 in range(args.p_max + 1) for p2 in range(args.p_max + 1)]
    crosscheck = config["cli"]["auto_crosscheck_max_order"]

    def evaluate(cell):
        p1, p2, n = cell
        result = compute_moment(MomentQuery(family, p1, p2, n, args.ensemble, args.method), crosscheck)
        return {"p1": p1, "p2": p2, "N": n, "exact": result.exact, "float": result.float_value,
                "method": result.formula_used}

    threads = config["cli"]["threads"]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(evaluate, cells))
    else:
        rows = [evaluate(cell) for cell in cells]
    rows.sort(key=lambda r: (r["N"], r["p1"], r["p2"]))

    get_logger().info(f"谱矩表完成: {len(rows)} 项", family.describe())
    columns = ["p1", "p2", "N", "exact", "float"]
    if args.format == "json":
        emit_rows([dict(row, query=dict(family.describe(), ensemble=args.ensemble)) for row in rows], "json")
    else:
        emit_rows([dict(row, float=_float_text(row["float"])) for row in rows], args.format or "text", columns)
    _snapshot(args, "table", rows, {"family": family.describe(), "ensemble": args.ensemble})
    return EXIT_OK


def cmd_verify(args, config: Dict[str, Any]) -> int:
    manager = VerificationManager(config, family_filter=args.family)
    results = manager.run(args.suite, config["cli"]["threads"])
    if not results:
        raise DomainError("没有可运行的校验套件", {"suite": args.suite})
    records = [r.to_dict() for r in results]
    if args.format == "json":
        emit_rows(records, "json")
    elif args.format == "csv":
        emit_rows(records, "csv", ["suite", "passed", "checked", "failures", "elapsed"])
    else:
        for r in results:
            status = "PASS" if r.passed else "FAIL"
            print(f"{status} {r.name} (checked {r.checked}, failures {r.failures}, {r.elapsed:.2f}s)")
            if r.first_counterexample:
                print(f"  first counterexample: {json.dumps(r.first_counterexample, ensure_ascii=False, default=str)}")
    _snapshot(args, "verify", records)
    return EXIT_OK if all(r.passed for r in results) else EXIT_FAILED


def cmd_asympt(args, config: Dict[str, Any]) -> int:
    family = build_family(args)
    report = asymptotic_check(family, args.p1, args.p2, args.N_list, args.ensemble, args.alpha)
    coeffs = AsymptoticCoeffs.compute(args.p1, args.p2, family.tau, args.alpha)

    if args.format == "json":
        print(json.dumps({"coefficients": coeffs.to_dict(), "rows": report.rows,
                          "passed": report.passed, "failures": report.failures},
                         ensure_ascii=False, indent=2))
    else:
        if args.format != "csv":
            print(f"# c1 = {format_scalar(coeffs.c1)}")
            second = coeffs.c2_prime if args.ensemble == "symplectic" else coeffs.c2
            print(f"# {'c2_prime' if args.ensemble == 'symplectic' else 'c2'} = {format_scalar(second)}")
            if coeffs.l1 is not None:
                print(f"# l1 = {format_scalar(coeffs.l1)}")
        emit_rows([row for row in report.rows if "N" in row], args.format or "text")
    for failure in report.failures:
        get_logger().warning("渐近校验失败", failure)
    _snapshot(args, "asympt", report.rows, {"family": family.describe(), "p1": args.p1, "p2": args.p2})
    return EXIT_OK if report.passed else EXIT_FAILED


def _limit_rows(check: str, p_max: int, n_max: int, alphas: List[Fraction]) -> List[Dict[str, Any]]:
    one = Fraction(1)
    rows: List[Dict[str, Any]] = []
    if check in ("catalan", "all"):
        for row in hermitian_limit_checks(p_max):
            ok = row["c1_tau1"] == str(row["catalan"]) == row["genus0"]
            rows.append({"check": "catalan", "p": row["p"], "expected": str(row["catalan"]),
                         "value": row["c1_tau1"], "passed": ok})
    if check in ("narayana", "all"):
        for alpha in alphas:
            for p in range(1, p_max + 1):
                value, expected = l1(p, 0, one, alpha), narayana(p, 1 + alpha)
                rows.append({"check": "narayana", "p": p, "alpha": str(alpha), "expected": str(expected),
                             "value": format_scalar(value), "passed": value == expected})
    if check in ("genus", "all"):
        for p in range(p_max + 1):
            coefficients = [str(genus_coeff(g, p)) for g in range((p + 1) // 2 + 1)]
            ok = all(genus_identity_holds(p, n) for n in range(1, n_max + 1))
            rows.append({"check": "genus", "p": p, "expected": "gue_moment", "value": " ".join(coefficients),
                         "passed": ok})
    if check in ("c2", "all"):
        for p in range(1, p_max + 1):
            expected = -Fraction(sum(binomial(2 * p, l) for l in range(p)), 2)
            value = c2_prime(p, p, one)
            rows.append({"check": "c2_prime", "p": p, "expected": str(expected), "value": format_scalar(value),
                         "passed": value == expected and c2(p, p, one) == 0})
    return rows


def cmd_limits(args, config: Dict[str, Any]) -> int:
    if args.p_max < 0 or args.N_max < 1:
        raise DomainError("p-max ≥ 0 且 N-max ≥ 1", {"p_max": args.p_max, "N_max": args.N_max})
    rows = _limit_rows(args.check, args.p_max, args.N_max, args.alpha_list)
    passed = all(row["passed"] for row in rows)
    emit_rows(rows, args.format or "text", ["check", "p", "alpha", "expected", "value", "passed"]
              if args.format != "json" else None)
    if args.format in (None, "text"):
        print("PASS" if passed else "FAIL")
    _snapshot(args, "limits", rows)
    return EXIT_OK if passed else EXIT_FAILED


def cmd_formulas(args, config: Dict[str, Any]) -> int:
    if args.name:
        info = formula_registry.get_formula_info(args.name)
        if info is None:
            raise DomainError(f"未知的公式: {args.name}",
                              {"available": formula_registry.get_available_formulas()})
        record = {key: value for key, value in info.items() if key != "formula_func"}
        record["name"] = args.name
        record["families"] = list(info["families"])
        if args.format == "json":
            print(json.dumps(record, ensure_ascii=False, indent=2))
        else:
            for key, value in record.items():
                print(f"{key}: {value}")
        return EXIT_OK

    rows = formula_registry.list_formulas()
    emit_rows(rows, args.format or "text", None if args.format == "json" else
              ["name", "families", "status", "display_name"])
    return EXIT_OK


def cmd_snapshots(args, config: Dict[str, Any]) -> int:
    base_dir = args.log_dir or config["logging"]["log_dir"] or "debug"
    session = args.session or latest_session_id(base_dir)
    if not session:
        raise DomainError("没有可用的快照会话，请用 --session 指定", {"dir": base_dir})
    snapshots = DataSnapshot(session, base_dir)

    if args.compare:
        diff = snapshots.compare_snapshots(args.stage, args.stage, other=DataSnapshot(args.compare, base_dir))
        if "error" in diff:
            raise DomainError(diff["error"], {"session": session, "other": args.compare, "stage": args.stage})
        print(json.dumps(diff, ensure_ascii=False, indent=2))
        return EXIT_OK if diff["identical"] else EXIT_FAILED

    if args.show:
        data = snapshots.load_snapshot(args.show)
        if data is None:
            raise DomainError(f"快照不存在: {args.show}", {"session": session})
        print(json.dumps(data, ensure_ascii=False, indent=2))
        return EXIT_OK

    stages = snapshots.list_snapshots()
    emit_rows([{"session": session, "stage": stage} for stage in stages], args.format or "text",
              None if args.format == "json" else ["session", "stage"])
    return EXIT_OK


COMMANDS = {
    "compute": cmd_compute,
    "table": cmd_table,
    "verify": cmd_verify,
    "asympt": cmd_asympt,
    "limits": cmd_limits,
    "formulas": cmd_formulas,
    "snapshots": cmd_snapshots,
}


def main(argv: Optional[List[str]] = None) -> int:
    """主函数，返回退出码"""
    args = parse_args(argv)
    load_env_files()
    config = apply_env_overrides(load_config(args.config))

    if args.threads is not None:
        config["cli"]["threads"] = max(1, args.threads)
    args.format = args.format or config["cli"]["format"]
    log_level = LogLevel(args.log_level or config["logging"]["level"])
    log_dir = args.log_dir or config["logging"]["log_dir"]
    if args.snapshot and not log_dir:
        log_dir = "debug"
    logger = init_logger(log_level, args.save_debug_data or config["logging"]["save_debug_data"], log_dir)
    set_factorial_cache_cap(config["exact"]["factorial_cache_cap"])

    try:
        logger.debug(f"执行命令: {args.command}", {"argv": argv if argv is not None else sys.argv[1:]})
        return COMMANDS[args.command](args, config)
    except DomainError as e:
        logger.error(f"参数错误: {e}", {}, e)
        return EXIT_DOMAIN
    except (OracleMismatchError, QuadratureConvergenceError) as e:
        logger.error(f"数值积分校验失败: {e}", {}, e)
        return EXIT_ORACLE
    except (FormulaMismatchError, InexactDivisionError, InterpolationError) as e:
        logger.error(f"精确公式校验失败: {e}", {}, e)
        return EXIT_FAILED
    finally:
        cleanup_logger()


if __name__ == "__main__":
    sys.exit(main())
