export { AllocSession, AllocatorSurface, Handle, EINVAL, ENOMEM } from './alloc';
export { TraceWriter, TraceOp, OpKind, formatOp } from './trace';
export { runReplay, runStats, parseReport, totalCorruptionDetected } from './runner';
export type { ReplayOutcome, ReportCounters, StatsRow } from './runner';
