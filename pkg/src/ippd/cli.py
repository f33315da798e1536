"""Command-line entry point.

Subcommands cover the whole pipeline: gen-maps, gen-episodes, parse,
propose, encode, train, run, report, render. The data root comes from
--data, then the IPPD_DATA environment variable, then the config file.
Exit codes: 0 success, 2 configuration error, 3 data error.
"""

from __future__ import annotations

import argparse
import json
import multiprocessing
import os
import sys
import time
import zlib

import numpy as np

from .config import RunConfig
from .discriminator import PathDiscriminator, build_model, train
from .encoding import Vocab
from .envgen import EnvSpec, generate_episode, generate_map, render, save_episodes
from .errors import ConfigError, DataError, IppdError
from .instruction_parser import default_parser, tokenize
from .metrics import EvalReport, METRIC_COLUMNS
from .pipeline import (AGENT_IPPD, AGENT_RANDOM, AGENTS, SPLITS, FeatureExtractor,
                       Workspace, answer_episode, build_training_items,
                       propose_for_episode, run_split)
from .semantic_map import CategoryTable, save_map


def _suite_seed(cfg):
    return cfg.get("suite", "seed")


def _derived_seed(cfg, name):
    return zlib.crc32(f"{_suite_seed(cfg)}:{name}".encode())


def _map_ids(cfg):
    train = [f"train_{i:03d}" for i in range(cfg.get("suite", "train_maps"))]
    unseen = [f"unseen_{i:03d}" for i in range(cfg.get("suite", "unseen_maps"))]
    return train, unseen


def _env_spec(cfg, map_id):
    s = cfg.values["suite"]
    return EnvSpec(
        seed=_derived_seed(cfg, map_id),
        grid_rooms=(s["rooms_x"], s["rooms_y"]),
        room_size_range=(s["room_min_m"], s["room_max_m"]),
        objects_per_room_range=(s["objects_per_room_min"],
                                s["objects_per_room_max"]),
        resolution=s["resolution_m"],
        map_id=map_id,
    )


def cmd_gen_maps(cfg, ws, args):
    ws.ensure_dirs()
    train, unseen = _map_ids(cfg)
    t0 = time.time()
    for map_id in train + unseen:
        vmap = generate_map(_env_spec(cfg, map_id))
        save_map(vmap, ws.map_path(map_id))
        print(f"wrote {ws.map_path(map_id)} "
              f"({len(vmap.voxels)} voxels, {len(vmap.instances())} objects)")
    print(f"{len(train) + len(unseen)} maps in {time.time() - t0:.1f} s")
    return 0


def _gen_split(cfg, ws, split, map_ids, n_episodes, parser, limits):
    episodes = []
    per_map = {}
    for i in range(n_episodes):
        map_id = map_ids[i % len(map_ids)]
        if map_id not in per_map:
            vmap = ws.load_map(map_id)
            per_map[map_id] = (vmap, ws.grid(map_id), ws.clusters(map_id, limits),
                               ws.segment_cache(map_id))
        vmap, grid, clusters, cache = per_map[map_id]
        ep_id = f"{split}_{i:04d}"
        ep = generate_episode(
            vmap, _derived_seed(cfg, ep_id), episode_id=ep_id, grid=grid,
            clusters=clusters, parser=parser, limits=limits, cache=cache,
            min_len=cfg.get("suite", "episode_min_len_m"),
            max_len=cfg.get("suite", "episode_max_len_m"),
            min_euclid=cfg.get("suite", "episode_min_euclid_m"),
            goal_near_m=cfg.get("suite", "episode_goal_near_m"))
        episodes.append(ep)
    save_episodes(episodes, ws.episodes_path(split))
    print(f"wrote {ws.episodes_path(split)} ({len(episodes)} episodes, "
          f"{len(map_ids)} maps)")


def cmd_gen_episodes(cfg, ws, args):
    ws.ensure_dirs()
    train, unseen = _map_ids(cfg)
    missing = [m for m in train + unseen if not os.path.exists(ws.map_path(m))]
    if missing:
        raise DataError(f"missing maps {missing[:3]}...; run gen-maps first")
    parser = default_parser()
    limits = cfg.proposer_limits()
    n_seen_maps = cfg.get("suite", "seen_eval_maps")
    rng = np.random.default_rng([_suite_seed(cfg), 0x5EE])
    seen_maps = [train[i] for i in
                 sorted(rng.choice(len(train), size=n_seen_maps, replace=False))]
    t0 = time.time()
    _gen_split(cfg, ws, "train", train, cfg.get("suite", "train_episodes"),
               parser, limits)
    _gen_split(cfg, ws, "eval_seen", seen_maps, cfg.get("suite", "eval_episodes"),
               parser, limits)
    _gen_split(cfg, ws, "eval_unseen", unseen, cfg.get("suite", "eval_episodes"),
               parser, limits)
    print(f"episodes in {time.time() - t0:.1f} s")
    return 0


def cmd_parse(cfg, ws, args):
    parser = default_parser()
    categories = CategoryTable.bundled()
    for text in args.instruction:
        components = parser.extract_key_components(text)
        out = []
        for c in components:
            d = c.to_json()
            if c.category_id is not None:
                d["label"] = categories.labels[c.category_id]
            out.append(d)
        print(json.dumps({"instruction": text, "components": out}))
    return 0


def _find_episode(ws, split, episode_id):
    for ep in ws.episodes(split):
        if ep.id == episode_id:
            return ep
    raise DataError(f"episode {episode_id!r} not found in split {split!r}")


def cmd_propose(cfg, ws, args):
    ep = _find_episode(ws, args.split, args.episode)
    parser = default_parser()
    limits = cfg.proposer_limits()
    vmap = ws.load_map(ep.map_id)
    candidates, fallback = propose_for_episode(
        vmap, ws.grid(ep.map_id), ws.clusters(ep.map_id, limits), parser,
        limits, ep)
    print(f"episode {ep.id} on {ep.map_id}: {len(candidates)} candidates"
          f"{' (fallback)' if fallback else ''}")
    for i, c in enumerate(candidates[:args.max_print]):
        print(f"  [{i:3d}] length {c.geodesic_length:6.2f} m, "
              f"end ({c.endpoint[0]:.2f}, {c.endpoint[1]:.2f}), "
              f"landmarks {len(c.visited_landmarks)}")
    if args.render:
        paths = [ep.gt_path] + [c.waypoints for c in candidates[:args.max_print]]
        render(vmap, paths, args.render)
        print(f"rendered {args.render}")
    return 0


def cmd_encode(cfg, ws, args):
    ep = _find_episode(ws, args.split, args.episode)
    parser = default_parser()
    limits = cfg.proposer_limits()
    vmap = ws.load_map(ep.map_id)
    candidates, _ = propose_for_episode(
        vmap, ws.grid(ep.map_id), ws.clusters(ep.map_id, limits), parser,
        limits, ep)
    if args.candidate >= len(candidates):
        raise DataError(f"candidate index {args.candidate} out of range "
                        f"({len(candidates)} available)")
    e = cfg.values["encoder"]
    extractor = FeatureExtractor(vmap, e["spacing_m"], e["compass_radius_m"],
                                 e["max_keypoints"])
    feats = extractor(candidates[args.candidate].waypoints,
                      start_theta=ep.start_pose[3])
    counts = [len(p) for p in feats.compass_points]
    print(f"keypoints: {len(feats)}")
    print(f"compass sizes: {counts}")
    print(f"pose[0]: {np.array2string(feats.pose_raw[0], precision=4)}")
    tokens = tokenize(ep.instruction, keep_punct=False)
    print(f"tokens ({len(tokens)}): {' '.join(tokens)}")
    return 0


def cmd_train(cfg, ws, args):
    ws.ensure_dirs()
    vocab = Vocab.from_lexicon(default_parser().lexicon)
    categories = CategoryTable.bundled()
    limits = cfg.proposer_limits()
    e = cfg.values["encoder"]
    t = cfg.values["trainer"]
    t0 = time.time()
    items = build_training_items(
        ws, vocab, split="train", limits=limits,
        n_per_episode=t["candidates_per_episode"],
        lambda_mix=t["lambda_mix"], spacing=e["spacing_m"],
        radius=e["compass_radius_m"], max_keypoints=e["max_keypoints"])
    print(f"assembled {len(items)} training items in {time.time() - t0:.1f} s")
    model = build_model(vocab, categories, seed=t["seed"], **cfg.model_kwargs())
    tc = cfg.train_config(log_path=ws.train_log_path())
    t0 = time.time()
    history = train(model, items, tc, pad_id=vocab.pad_id())
    last = history[-1]
    print(f"trained {tc.epochs} epochs in {time.time() - t0:.1f} s "
          f"(final mse {last[2]:.4f}, mlm {last[3]:.4f})")
    model.save(ws.checkpoint_path())
    print(f"wrote {ws.checkpoint_path()} and {ws.train_log_path()}")
    return 0


_POOL_STATE = {}


def _pool_init(data_dir, agent, ckpt_path, values):
    import torch

    torch.set_num_threads(1)
    cfg = RunConfig()
    cfg.values = values
    ws = Workspace(data_dir)
    model = vocab = None
    if agent == AGENT_IPPD:
        model = PathDiscriminator.load(ckpt_path)
        vocab = Vocab.from_lexicon(default_parser().lexicon)
    _POOL_STATE.update(ws=ws, agent=agent, model=model, vocab=vocab,
                       limits=cfg.proposer_limits())


def _pool_answer(ep):
    s = _POOL_STATE
    waypoints, fallback = answer_episode(
        s["ws"], ep, s["agent"], model=s["model"], vocab=s["vocab"],
        limits=s["limits"])
    return ep.id, waypoints, fallback


def cmd_run(cfg, ws, args):
    ws.ensure_dirs()
    agent = args.agent or cfg.get("run", "agent")
    if agent not in AGENTS:
        raise ConfigError(f"unknown agent {agent!r}; choose from {AGENTS}")
    split = args.split
    deterministic = args.deterministic or cfg.get("run", "deterministic")
    workers = 1 if deterministic else (args.workers or cfg.get("run", "workers"))
    import torch

    torch.set_num_threads(1 if deterministic else
                          max(1, cfg.get("trainer", "num_threads")))
    model = vocab = None
    if agent == AGENT_IPPD:
        if not os.path.exists(ws.checkpoint_path()):
            raise DataError(f"no checkpoint at {ws.checkpoint_path()}; "
                            "run train first")
        model = PathDiscriminator.load(ws.checkpoint_path())
        vocab = Vocab.from_lexicon(default_parser().lexicon)
    t0 = time.time()
    if workers > 1:
        episodes = ws.episodes(split)
        ctx = multiprocessing.get_context("fork")
        with ctx.Pool(workers, initializer=_pool_init,
                      initargs=(ws.root, agent, ws.checkpoint_path(),
                                cfg.values)) as pool:
            results = pool.map(_pool_answer, episodes)
        predictions = {ep_id: (wp, fb) for ep_id, wp, fb in results}
        from .metrics import evaluate

        report = evaluate(episodes, predictions, split=split, agent=agent,
                          d_th=cfg.get("metrics", "d_th"))
    else:
        report = run_split(ws, split, agent, model=model, vocab=vocab,
                           limits=cfg.proposer_limits(),
                           d_th=cfg.get("metrics", "d_th"))
    json_path = ws.report_path(split, agent, "json")
    csv_path = ws.report_path(split, agent, "csv")
    report.write_json(json_path)
    report.write_csv(csv_path)
    agg = report.aggregate()
    line = "  ".join(f"{k} {agg[k]:.3f}" for k in METRIC_COLUMNS)
    print(f"{split}/{agent} ({len(report.records)} episodes, "
          f"{time.time() - t0:.1f} s): {line}")
    print(f"wrote {json_path} and {csv_path}")
    return 0


def cmd_report(cfg, ws, args):
    reports = [EvalReport.read_json(p) for p in args.reports]
    splits = {r.split for r in reports}
    if len(splits) > 1:
        raise DataError(f"reports mix splits {sorted(splits)}; "
                        "compare one split at a time")
    header = ["split", "agent", "episodes"] + list(METRIC_COLUMNS)
    rows = []
    for r in reports:
        agg = r.aggregate()
        rows.append([r.split, r.agent, str(len(r.records))]
                    + [f"{agg[k]:.3f}" for k in METRIC_COLUMNS])
    widths = [max(len(h), *(len(row[i]) for row in rows))
              for i, h in enumerate(header)]
    fmt = "  ".join(f"{{:<{w}}}" for w in widths)
    print(fmt.format(*header))
    for row in rows:
        print(fmt.format(*row))
    if args.csv:
        with open(args.csv, "w") as f:
            f.write(",".join(header) + "\n")
            for row in rows:
                f.write(",".join(row) + "\n")
        print(f"wrote {args.csv}")
    return 0


def cmd_render(cfg, ws, args):
    vmap = ws.load_map(args.map)
    paths = []
    if args.episode:
        split = args.split or "train"
        ep = _find_episode(ws, split, args.episode)
        if ep.map_id != args.map:
            raise DataError(f"episode {ep.id} belongs to {ep.map_id}, "
                            f"not {args.map}")
        paths.append(ep.gt_path)
    render(vmap, paths, args.out)
    print(f"rendered {args.out}")
    return 0


def build_arg_parser():
    p = argparse.ArgumentParser(
        prog="ippd",
        description="Instruction-constrained path proposal and discrimination "
                    "on synthetic indoor maps.")
    p.add_argument("--config", help="INI config file")
    p.add_argument("--data", help="data root (overrides IPPD_DATA)")
    p.add_argument("--set", action="append", default=[], metavar="SEC.KEY=VAL",
                   help="override a config value")
    sub = p.add_subparsers(dest="command", required=True)

    sub.add_parser("gen-maps", help="generate the synthetic map suite")
    sub.add_parser("gen-episodes", help="generate episodes for all splits")

    sp = sub.add_parser("parse", help="extract key components from instructions")
    sp.add_argument("instruction", nargs="+")

    sp = sub.add_parser("propose", help="propose candidate paths for an episode")
    sp.add_argument("--split", default="train", choices=SPLITS)
    sp.add_argument("--episode", required=True)
    sp.add_argument("--max-print", type=int, default=10)
    sp.add_argument("--render", help="write a PNG overview")

    sp = sub.add_parser("encode", help="show encoder features for a candidate")
    sp.add_argument("--split", default="train", choices=SPLITS)
    sp.add_argument("--episode", required=True)
    sp.add_argument("--candidate", type=int, default=0)

    sub.add_parser("train", help="train the path discriminator")

    sp = sub.add_parser("run", help="evaluate an agent on a split")
    sp.add_argument("--split", default="eval_seen", choices=SPLITS)
    sp.add_argument("--agent", choices=AGENTS)
    sp.add_argument("--workers", type=int, default=0,
                    help="episode-level worker processes")
    sp.add_argument("--deterministic", action="store_true",
                    help="single worker, single thread")

    sp = sub.add_parser("report", help="tabulate one or more reports")
    sp.add_argument("reports", nargs="+")
    sp.add_argument("--csv", help="also write the table as CSV")

    sp = sub.add_parser("render", help="render a map (and optional episode)")
    sp.add_argument("--map", required=True)
    sp.add_argument("--split", choices=SPLITS)
    sp.add_argument("--episode")
    sp.add_argument("--out", required=True)
    return p


_COMMANDS = {
    "gen-maps": cmd_gen_maps,
    "gen-episodes": cmd_gen_episodes,
    "parse": cmd_parse,
    "propose": cmd_propose,
    "encode": cmd_encode,
    "train": cmd_train,
    "run": cmd_run,
    "report": cmd_report,
    "render": cmd_render,
}


def main(argv=None):
    args = build_arg_parser().parse_args(argv)
    try:
        cfg = RunConfig.load(args.config, args.set)
        ws = Workspace(cfg.data_dir(args.data))
        return _COMMANDS[args.command](cfg, ws, args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except IppdError as e:
        print(f"error: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
