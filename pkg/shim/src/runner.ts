/** Spawns the hardalloc CLI and parses its report, per-op results, and the
 *  per-class stats CSV.  This is the only channel to the allocator. */

import { spawnSync } from 'node:child_process';
import { mkdtempSync, readFileSync, rmSync, writeFileSync } from 'node:fs';
import { tmpdir } from 'node:os';
import { join } from 'node:path';

export interface ReportCounters {
  ops: number;
  violations: number;
  faults: number;
  nulls: number;
  invalidFrees: number;
  corruptionDetected: number;
  live: number;
}

export interface ReplayOutcome {
  exitCode: number;
  report: ReportCounters | null;
  /** op index -> result token ("0x....", "null", "freed", "invalid", ...) */
  results: Map<number, string>;
  stdout: string;
  stderr: string;
}

export interface StatsRow {
  arena: number;
  classIndex: number;
  slotSize: number;
  live: number;
  slabsUsed: number;
  quarantined: number;
  corruptionDetected: number;
}

function cliCommand(): string[] {
  const bin = process.env.HARDALLOC_BIN;
  return bin ? bin.split(' ') : ['hardalloc'];
}

function runCli(args: string[], env: Record<string, string>) {
  const [cmd, ...pre] = cliCommand();
  return spawnSync(cmd, [...pre, ...args], {
    encoding: 'utf-8',
    env: { ...process.env, ...env },
    timeout: 120_000,
  });
}

const REPORT_RE =
  /report: ops=(\d+) violations=(\d+) faults=(\d+) nulls=(\d+) invalid_frees=(\d+) corruption_detected=(\d+) live=(\d+)/;

export function parseReport(stdout: string): ReportCounters | null {
  const m = stdout.match(REPORT_RE);
  if (!m) return null;
  const [ops, violations, faults, nulls, invalidFrees, corruptionDetected, live] =
    m.slice(1).map(Number);
  return { ops, violations, faults, nulls, invalidFrees, corruptionDetected, live };
}

export function runReplay(
  traceText: string,
  env: Record<string, string> = {},
): ReplayOutcome {
  const dir = mkdtempSync(join(tmpdir(), 'hardalloc-shim-'));
  const tracePath = join(dir, 'session.trace');
  const resultsPath = join(dir, 'results.txt');
  try {
    writeFileSync(tracePath, traceText);
    const proc = runCli(['replay', '--trace', tracePath, '--results', resultsPath], env);
    if (proc.error) throw proc.error;
    const results = new Map<number, string>();
    try {
      for (const line of readFileSync(resultsPath, 'utf-8').split('\n')) {
        if (!line.trim()) continue;
        const fields = line.split(' ');
        results.set(Number(fields[0]), fields[3]);
      }
    } catch {
      // the run aborted before results were written
    }
    return {
      exitCode: proc.status ?? 1,
      report: parseReport(proc.stdout ?? ''),
      results,
      stdout: proc.stdout ?? '',
      stderr: proc.stderr ?? '',
    };
  } finally {
    rmSync(dir, { recursive: true, force: true });
  }
}

export function runStats(
  traceText: string,
  env: Record<string, string> = {},
): StatsRow[] {
  const dir = mkdtempSync(join(tmpdir(), 'hardalloc-shim-'));
  const tracePath = join(dir, 'session.trace');
  try {
    writeFileSync(tracePath, traceText);
    const proc = runCli(['stats', '--trace', tracePath], env);
    if (proc.error) throw proc.error;
    if (proc.status !== 0) {
      throw new Error(`hardalloc stats failed (${proc.status}): ${proc.stderr}`);
    }
    const lines = (proc.stdout ?? '').trim().split('\n');
    const rows: StatsRow[] = [];
    for (const line of lines.slice(1)) {
      const f = line.split(',').map(Number);
      rows.push({
        arena: f[0],
        classIndex: f[1],
        slotSize: f[2],
        live: f[3],
        slabsUsed: f[4],
        quarantined: f[5],
        corruptionDetected: f[6],
      });
    }
    return rows;
  } finally {
    rmSync(dir, { recursive: true, force: true });
  }
}

export function totalCorruptionDetected(rows: StatsRow[]): number {
  return rows.reduce((acc, r) => acc + r.corruptionDetected, 0);
}
