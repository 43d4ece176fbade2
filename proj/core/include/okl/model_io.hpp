#pragma once

#include <string>

#include "okl/solver.hpp"

namespace okl {

/// Persist a fitted model as a directory of plain-text files:
///   A.txt, B.txt   factor tables, one row per line, space separated,
///                  full-precision scientific notation
///   metadata.txt   key/value lines: lambda, p, jitter, kernel variant and
///                  parameters, seed, model kind, dimensions
///   inputs.txt     the training-input list ("scalar" or "item" records)
/// The layout is stable across versions (metadata carries a format tag).
void save_model(const OklModel& model, const std::string& dir);

OklModel load_model(const std::string& dir);

/// The inputs.txt encoding, reused by the CLI for standalone input lists:
/// first line is `scalar` or `item`; scalar records are one value per line,
/// item records are `id flag flag ...`.
void save_inputs(const std::vector<InputPoint>& inputs, const std::string& path);
std::vector<InputPoint> load_inputs(const std::string& path);

}  // namespace okl
