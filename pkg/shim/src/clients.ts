/** Conformance scenarios shared by the standalone clients and the tests.
 *  Each returns a process exit code: 0 = contract held. */

import { AllocSession } from './alloc';
import { totalCorruptionDetected } from './runner';

export function smokeClient(): number {
  const s = new AllocSession();
  const p = s.malloc(100);
  const probe = s.malloc_usable_size(p);
  s.free(p);
  const out = s.run();
  if (out.exitCode !== 0 || !out.report || out.report.violations !== 0) return 1;
  const addr = s.addressOf(p);
  if (addr === null || addr % 16n !== 0n) return 1;
  if (s.usableOf(probe) < 100) return 1;
  return 0;
}

export function churnClient(iterations = 300): number {
  const s = new AllocSession();
  const sizes = [8, 16, 24, 48, 100, 256, 1024, 2048, 4096, 6000];
  const live: Array<{ p: number; size: number }> = [];
  for (let i = 0; i < iterations; i++) {
    if (live.length > 0 && i % 3 === 2) {
      const block = live.pop()!;
      s.free(block.p);
    } else {
      const size = sizes[i % sizes.length];
      const p = s.malloc(size);
      if (size > 0) s.poke(p, i % size, 0x5a); // stays within the request
      live.push({ p, size });
    }
  }
  for (const block of live) s.free(block.p);
  const out = s.run();
  if (out.exitCode !== 0 || !out.report) return 1;
  const r = out.report;
  if (r.violations !== 0 || r.invalidFrees !== 0 || r.corruptionDetected !== 0) return 1;
  if (r.live !== 0) return 1;
  return 0;
}

/** Exit contract: nonzero under the Abort policy, 0 with the detection
 *  counted under Report. Policy comes from HARDALLOC_INVALID_FREE. */
export function doubleFreeClient(): number {
  const s = new AllocSession();
  const p = s.malloc(100);
  s.free(p);
  s.free(p); // the attack
  const out = s.run();
  if (out.exitCode !== 0) return out.exitCode; // abort policy kills the replay
  if (!out.report || out.report.invalidFrees < 1) return 1;
  return 0;
}

export function uafClient(): number {
  const s = new AllocSession();
  const a = s.malloc(24);
  const b = s.malloc(24); // keeps the slab in service after a is freed
  s.free(a);
  s.poke(a, 0, 0x41); // use-after-free write into freed memory
  const c = s.malloc(24); // must be a clean block, never the poisoned bytes
  s.peek(c, 0);
  s.free(b);
  s.free(c);
  const out = s.run();
  if (out.exitCode !== 0 || !out.report) return 1;
  if (out.report.violations !== 0) return 1; // zero-fill contract held
  if (out.report.corruptionDetected < 1) return 1; // and the write was noticed
  const ca = s.addressOf(c);
  return ca !== null && ca !== s.addressOf(a) ? 0 : 1;
}

export function overflowCanaryClient(): number {
  const s = new AllocSession();
  const p = s.malloc(24); // usable 24 with the default canary budget
  s.poke(p, 24, 0x41); // one byte past the usable area
  s.free(p);
  const out = s.run();
  if (out.exitCode !== 0) return 1;
  // detection read back through the stats dump
  return totalCorruptionDetected(s.stats()) >= 1 ? 0 : 1;
}
