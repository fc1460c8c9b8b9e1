/** Error classes mirroring the core toolkit's exception names. */

export class TatError extends Error {
  constructor(message: string) {
    super(message);
    this.name = new.target.name;
  }
}

export class UsageError extends TatError {}
export class MarkerCollision extends TatError {}
export class EncodingError extends TatError {}
export class ConfigError extends TatError {}
export class CoverageError extends TatError {}
export class DisconnectedLattice extends TatError {}
export class UnknownTokenId extends TatError {}
export class DuplicateToken extends TatError {}
export class ZeroLength extends TatError {}
export class SegmentationFailure extends TatError {}
export class DimensionMismatch extends TatError {}
export class PlanGap extends TatError {}
export class EmptyInput extends TatError {}
export class InternalError extends TatError {}

const byName: Record<string, new (message: string) => TatError> = {
  MarkerCollision,
  EncodingError,
  ConfigError,
  CoverageError,
  DisconnectedLattice,
  UnknownTokenId,
  DuplicateToken,
  ZeroLength,
  SegmentationFailure,
  DimensionMismatch,
  PlanGap,
  EmptyInput,
};

/** Build the matching error instance for a core error-class name. */
export function errorFromName(name: string, message: string): TatError {
  const cls = byName[name] ?? TatError;
  return new cls(message);
}
