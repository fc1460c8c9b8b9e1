export { BoundTokenizer, mapEmbed } from "./tokenizer.js";
export type { EncodeMode, EncodeOptions, LoadOptions, MapEmbedOptions } from "./tokenizer.js";
export { runTat, resolveBin } from "./cli.js";
export {
  ConfigError,
  CoverageError,
  DimensionMismatch,
  DisconnectedLattice,
  DuplicateToken,
  EmptyInput,
  EncodingError,
  InternalError,
  MarkerCollision,
  PlanGap,
  SegmentationFailure,
  TatError,
  UnknownTokenId,
  UsageError,
  ZeroLength,
  errorFromName,
} from "./errors.js";
