/** Trace wire format shared with the allocator CLI: one op per line,
 *  `t<k> <kind> <id> <args...>`, write bytes in hex. */

export type OpKind = 'a' | 'f' | 'ra' | 'ca' | 'ma' | 'w' | 'r' | 'us';

export interface TraceOp {
  kind: OpKind;
  id: number;
  args: number[];
  thread?: number;
}

export function formatOp(op: TraceOp): string {
  const tag = `t${op.thread ?? 0}`;
  const args =
    op.kind === 'w'
      ? [op.args[0], op.args[1].toString(16).padStart(2, '0')]
      : op.args;
  return [tag, op.kind, op.id, ...args].join(' ');
}

export class TraceWriter {
  readonly ops: TraceOp[] = [];

  /** Appends one op and returns its index in the trace. */
  push(op: TraceOp): number {
    this.ops.push(op);
    return this.ops.length - 1;
  }

  text(): string {
    return this.ops.map(formatOp).join('\n') + '\n';
  }
}
