// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The gcf Authors

#pragma once

#include <stdexcept>
#include <string>

namespace gcf {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input data: files, records, token ids, dimensions.
class DataError : public Error {
 public:
  using Error::Error;
};

/// Caller violated an argument contract (out-of-range k, p, tau, ...).
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// The observed string cannot be produced by the provider, so the
/// posterior over the sampling noise is undefined.
class UndefinedPosteriorError : public Error {
 public:
  using Error::Error;
};

/// Remote logit service failed (connect, timeout, protocol error).
class TransportError : public Error {
 public:
  using Error::Error;
};

}  // namespace gcf
