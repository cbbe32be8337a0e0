/** The exported allocation surface over the allocator's trace interface.
 *
 * Each call on the surface records exactly one trace op; `run()` replays the
 * whole session through the CLI and binds per-call results, so the shim adds
 * no allocation semantics of its own.  Handles stand in for pointers: after
 * `run()`, `addressOf(handle)` yields the address the allocator returned.
 */

import { TraceWriter } from './trace';
import { ReplayOutcome, runReplay, runStats, StatsRow } from './runner';

export const EINVAL = 22;
export const ENOMEM = 12;

/** A recorded allocation; resolves to an address (or null) after run(). */
export type Handle = number;

/** The declared surface: signature-for-signature the standard allocation API. */
export interface AllocatorSurface {
  malloc(size: number): Handle;
  free(p: Handle | null): void;
  calloc(n: number, size: number): Handle;
  realloc(p: Handle | null, size: number): Handle;
  aligned_alloc(alignment: number, size: number): Handle | null;
  posix_memalign(alignment: number, size: number): { rc: number; ptr: Handle | null };
  memalign(alignment: number, size: number): Handle | null;
  malloc_usable_size(p: Handle | null): Handle;
}

function isPow2(x: number): boolean {
  return x > 0 && (x & (x - 1)) === 0;
}

interface Recorded {
  opIndex: number;
  kind: string;
}

export class AllocSession implements AllocatorSurface {
  private writer = new TraceWriter();
  private nextId = 1;
  private recorded = new Map<Handle, Recorded>();
  private probes = new Map<Handle, number>(); // usable-size probe -> op index
  private outcome: ReplayOutcome | null = null;
  private rejected = new Set<Handle>(); // calls refused before reaching the allocator

  private fresh(kind: 'a' | 'ca' | 'ma', args: number[]): Handle {
    const id = this.nextId++;
    const opIndex = this.writer.push({ kind, id, args });
    this.recorded.set(id, { opIndex, kind });
    return id;
  }

  malloc(size: number): Handle {
    return this.fresh('a', [size]);
  }

  free(p: Handle | null): void {
    if (p === null) return; // free(NULL) is a no-op
    this.writer.push({ kind: 'f', id: p, args: [] });
  }

  calloc(n: number, size: number): Handle {
    return this.fresh('ca', [n, size]);
  }

  realloc(p: Handle | null, size: number): Handle {
    if (p === null) return this.malloc(size); // realloc(NULL, n) == malloc(n)
    const opIndex = this.writer.push({ kind: 'ra', id: p, args: [size] });
    this.recorded.set(p, { opIndex, kind: 'ra' });
    return p;
  }

  aligned_alloc(alignment: number, size: number): Handle | null {
    if (!isPow2(alignment) || alignment > 4096) return null;
    return this.fresh('ma', [alignment, size]);
  }

  /** Distinct error-return convention: rc instead of a null pointer. */
  posix_memalign(alignment: number, size: number): { rc: number; ptr: Handle | null } {
    if (!isPow2(alignment) || alignment % 8 !== 0 || alignment > 4096) {
      return { rc: EINVAL, ptr: null };
    }
    return { rc: 0, ptr: this.fresh('ma', [alignment, size]) };
  }

  memalign(alignment: number, size: number): Handle | null {
    return this.aligned_alloc(alignment, size);
  }

  malloc_usable_size(p: Handle | null): Handle {
    if (p === null) {
      const probe = -this.nextId++;
      this.rejected.add(probe);
      return probe; // resolves to 0 without an op, like usable_size(NULL)
    }
    const probe = -this.nextId++;
    this.probes.set(probe, this.writer.push({ kind: 'us', id: p, args: [] }));
    return probe;
  }

  /** Client memory access, for conformance scenarios. */
  poke(p: Handle, offset: number, byte: number): void {
    this.writer.push({ kind: 'w', id: p, args: [offset, byte] });
  }

  peek(p: Handle, offset: number): void {
    this.writer.push({ kind: 'r', id: p, args: [offset] });
  }

  traceText(): string {
    return this.writer.text();
  }

  /** Replay the recorded session through the CLI. */
  run(env: Record<string, string> = {}): ReplayOutcome {
    this.outcome = runReplay(this.traceText(), env);
    return this.outcome;
  }

  /** Per-class counters for the same session (separate stats replay). */
  stats(env: Record<string, string> = {}): StatsRow[] {
    return runStats(this.traceText(), env);
  }

  private result(p: Handle): string | undefined {
    if (this.outcome === null) throw new Error('session has not been run');
    const rec = this.recorded.get(p);
    return rec === undefined ? undefined : this.outcome.results.get(rec.opIndex);
  }

  /** Address the allocator returned for this handle, or null. */
  addressOf(p: Handle): bigint | null {
    const token = this.result(p);
    return token !== undefined && token.startsWith('0x') ? BigInt(token) : null;
  }

  /** 0 on success, ENOMEM when the allocation came back null. */
  rcOf(p: Handle | null): number {
    if (p === null) return EINVAL;
    return this.addressOf(p) !== null ? 0 : ENOMEM;
  }

  /** Value of a malloc_usable_size probe. */
  usableOf(probe: Handle): number {
    if (this.rejected.has(probe)) return 0;
    if (this.outcome === null) throw new Error('session has not been run');
    const opIndex = this.probes.get(probe);
    if (opIndex === undefined) throw new Error('not a usable-size probe');
    return Number(this.outcome.results.get(opIndex) ?? 0);
  }
}
