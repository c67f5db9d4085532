# -*- coding: utf-8 -*-
"""
Talking Portrait - Main Entry Point
命令行入口：synth / train-motion / train-field / render / eval

退出码：0 成功，1 校验错误（配置、数据集、形状、取值域），2 运行时错误
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from src.config import LOG_FILE_NAME, OUTPUT_DIR, Config, load_config
from src.data import SyntheticSceneSpec, generate_synthetic, open_dataset
from src.exceptions import VALIDATION_ERRORS, PortraitError, StateError
from src.pipeline import run_eval, run_render
from src.training import (
    TrainConfig,
    latest_checkpoint,
    load_field_models,
    load_motion_models,
    train_motion,
    train_stage,
)
from src.utils.helpers import ensure_dir

logger = logging.getLogger("main")

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_RUNTIME = 2


def setup_logging(out_dir: Optional[Path], verbose: bool = False) -> None:
    """stdout + 输出目录下的 portrait.log"""
    log_dir = ensure_dir(out_dir if out_dir is not None else Path.cwd())
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        handlers=[
            logging.StreamHandler(sys.stdout),
            logging.FileHandler(log_dir / LOG_FILE_NAME, encoding="utf-8"),
        ],
        force=True,
    )
    # 第三方库的调试输出太多
    logging.getLogger("matplotlib").setLevel(logging.WARNING)
    logging.getLogger("PIL").setLevel(logging.WARNING)


def build_config(args: argparse.Namespace) -> Config:
    overrides = {}
    if args.seed is not None:
        overrides["train.seed"] = args.seed
        if args.command == "synth":
            overrides["synth.seed"] = args.seed
    return load_config(args.config, overrides)


def resolve_motion(args: argparse.Namespace) -> Path:
    if args.motion:
        return Path(args.motion)
    found = latest_checkpoint(args.models, "motion")
    if found is None:
        raise StateError("找不到运动检查点", f"请用 --motion 指定，或先运行 train-motion（搜索目录 {args.models}）")
    return found


def resolve_field(args: argparse.Namespace) -> Path:
    if args.checkpoint:
        return Path(args.checkpoint)
    found = latest_checkpoint(args.models, "field_fine") or latest_checkpoint(args.models, "field_coarse")
    if found is None:
        raise StateError("找不到辐射场检查点", f"请用 --checkpoint 指定，或先运行 train-field（搜索目录 {args.models}）")
    return found


# =============================================================================
# 子命令
# =============================================================================


def cmd_synth(args: argparse.Namespace, cfg: Config) -> None:
    spec = SyntheticSceneSpec.from_config(cfg)
    generate_synthetic(spec, args.out)


def cmd_train_motion(args: argparse.Namespace, cfg: Config) -> None:
    dataset = open_dataset(args.data)
    result = train_motion(TrainConfig.from_config(cfg), cfg, dataset, args.out)
    logger.info(f"运动检查点: {result.checkpoint}")


def cmd_train_field(args: argparse.Namespace, cfg: Config) -> None:
    dataset = open_dataset(args.data)
    args.models = args.models or args.out
    motion_path = resolve_motion(args)
    motion, _ = load_motion_models(motion_path)
    result = train_stage(
        args.stage,
        TrainConfig.from_config(cfg),
        cfg,
        dataset,
        motion,
        args.out,
        motion_checkpoint=motion_path,
        coarse_checkpoint=args.coarse,
    )
    logger.info(f"{args.stage} 阶段检查点: {result.checkpoint}")


def cmd_render(args: argparse.Namespace, cfg: Config) -> None:
    dataset = open_dataset(args.data)
    motion, _ = load_motion_models(resolve_motion(args))
    field, _ = load_field_models(resolve_field(args))
    run_render(cfg, cfg["train.seed"], dataset, motion, field, args.audio, args.out, au_path=args.au)


def cmd_eval(args: argparse.Namespace, cfg: Config) -> None:
    dataset = open_dataset(args.data)
    motion, _ = load_motion_models(resolve_motion(args))
    field_path = resolve_field(args)
    field, _ = load_field_models(field_path)
    frames = None
    if args.frames:
        frames = [int(v) for v in args.frames.split(",") if v.strip()]
    run_eval(
        cfg,
        cfg["train.seed"],
        dataset,
        motion,
        field,
        field_path,
        args.out,
        renders=args.renders,
        reference=args.reference,
        frames=frames,
    )


COMMANDS = {
    "synth": cmd_synth,
    "train-motion": cmd_train_motion,
    "train-field": cmd_train_field,
    "render": cmd_render,
    "eval": cmd_eval,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, default=None, help="key = value 格式的配置文件")
    common.add_argument("--seed", type=int, default=None, help="覆盖 train.seed")
    common.add_argument("--verbose", action="store_true", help="输出调试日志")
    common.add_argument("--out", type=Path, default=OUTPUT_DIR, help="输出目录")

    parser = argparse.ArgumentParser(prog="portrait", description="音频驱动的说话人像辐射场")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("synth", parents=[common], help="生成合成数据集")

    p = sub.add_parser("train-motion", parents=[common], help="训练 DLT、音频 VAE 与眨眼网络")
    p.add_argument("--data", type=Path, required=True, help="数据集目录")

    p = sub.add_parser("train-field", parents=[common], help="训练辐射场（粗/细阶段）")
    p.add_argument("--data", type=Path, required=True)
    p.add_argument("--stage", choices=["coarse", "fine"], required=True)
    p.add_argument("--motion", type=Path, default=None, help="运动检查点（默认取 --models 中最新的）")
    p.add_argument("--coarse", type=Path, default=None, help="细阶段的粗阶段检查点")
    p.add_argument("--models", type=Path, default=None, help="检查点搜索目录（默认 --out）")

    for name, help_text in (("render", "由音频特征渲染 PNG 序列"), ("eval", "评估并写出 eval.json / eval.csv")):
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.add_argument("--data", type=Path, required=True)
        p.add_argument("--motion", type=Path, default=None)
        p.add_argument("--checkpoint", type=Path, default=None, help="辐射场检查点")
        p.add_argument("--models", type=Path, default=OUTPUT_DIR, help="检查点搜索目录")
        if name == "render":
            p.add_argument("--audio", type=Path, required=True, help="音频特征 CSV")
            p.add_argument("--au", type=Path, default=None, help="AU45 强度 CSV")
        else:
            p.add_argument("--renders", type=Path, default=None, help="已渲染帧目录")
            p.add_argument("--reference", type=Path, default=None, help="参考帧目录")
            p.add_argument("--frames", type=str, default=None, help="逗号分隔的帧序号")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(args.out, args.verbose)
    try:
        cfg = build_config(args)
        logger.info(f"命令 {args.command}，输出目录 {args.out}")
        COMMANDS[args.command](args, cfg)
    except VALIDATION_ERRORS as e:
        logger.error(f"校验失败: {e}")
        return EXIT_VALIDATION
    except PortraitError as e:
        logger.error(f"运行失败: {e}")
        return EXIT_RUNTIME
    except Exception as e:
        logger.exception(f"未预期的错误: {e}")
        return EXIT_RUNTIME
    logger.info("完成")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
