#!/usr/bin/env node
/** CLI flags mirror BridgeConfig: --corpus <jsonl> --out <dir> [--backend heuristic]. */

import { BackendUnavailable, parseCorpus } from "./bridge";

interface CliArgs {
  corpus?: string;
  out?: string;
  backend: string;
  pipeline: string;
}

function parseArgs(argv: string[]): CliArgs {
  const args: CliArgs = { backend: "heuristic", pipeline: "default" };
  for (let i = 0; i < argv.length; i++) {
    switch (argv[i]) {
      case "--corpus":
        args.corpus = argv[++i];
        break;
      case "--out":
        args.out = argv[++i];
        break;
      case "--backend":
        args.backend = argv[++i];
        break;
      case "--pipeline":
        args.pipeline = argv[++i];
        break;
      default:
        throw new Error(`unknown flag ${argv[i]}`);
    }
  }
  return args;
}

function main(): number {
  let args;
  try {
    args = parseArgs(process.argv.slice(2));
  } catch (err) {
    console.error((err as Error).message);
    return 2;
  }
  if (!args.corpus || !args.out) {
    console.error(
      "usage: cli.js --corpus <corpus.jsonl> --out <dir> [--backend heuristic] [--pipeline default]",
    );
    return 2;
  }
  try {
    const report = parseCorpus({
      backend: args.backend,
      pipeline: args.pipeline,
      corpusPath: args.corpus,
      outDir: args.out,
    });
    console.error(
      `wrote ${report.files} files (${report.skipped.length} skipped, ` +
        `${report.aspectViolations.length} aspect mismatches logged)`,
    );
    return report.skipped.length > 0 ? 1 : 0;
  } catch (err) {
    if (err instanceof BackendUnavailable) {
      console.error(err.message);
      return 2;
    }
    console.error((err as Error).stack ?? String(err));
    return 2;
  }
}

process.exit(main());
