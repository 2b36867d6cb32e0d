#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace amflow {

// Base class for all toolkit errors. The CLI maps these to exit code 2
// (usage/format problems); everything else becomes exit code 1.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed or unreadable file content (.flo, PNG, AMFL, JSON, layouts).
class FormatError : public Error {
public:
    using Error::Error;
};

// Raster/field dimensions do not agree.
class ShapeError : public Error {
public:
    using Error::Error;
};

// Invalid metric or schedule parameters.
class ParameterError : public Error {
public:
    using Error::Error;
};

// Invalid scene description (degenerate shapes, missing poses, bad camera).
class SceneError : public Error {
public:
    using Error::Error;
};

// Occlusion ordering could not be reduced to a strict layering.
class StratifyError : public Error {
public:
    StratifyError(const std::string& msg, std::vector<int> cycle_ids)
        : Error(msg), cycle(std::move(cycle_ids)) {}

    // Instance ids forming the unresolved cycle, in traversal order.
    std::vector<int> cycle;
};

// Evaluation over a stack pair (or pooled set) with no scorable level.
class EmptyEvaluation : public Error {
public:
    using Error::Error;
};

// Filesystem-level failure (open/read/write).
class IoError : public Error {
public:
    using Error::Error;
};

} // namespace amflow
