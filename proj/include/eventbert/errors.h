// Exception types shared across the pipeline.
//
// Errors fall into two families that the CLI maps onto exit codes:
// DataError (bad input, exit 1) and ConfigError (bad settings, exit 2).

#ifndef EVENTBERT_ERRORS_H_
#define EVENTBERT_ERRORS_H_

#include <stdexcept>
#include <string>

namespace eventbert {

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed CoNLL-U line. `line` is 1-based.
class ParseError : public DataError {
 public:
  ParseError(size_t line, const std::string& what)
      : DataError("line " + std::to_string(line) + ": " + what), line_(line) {}
  size_t line() const { return line_; }

 private:
  size_t line_;
};

// Dependency structure violation. `sentence` is the 1-based ordinal of the
// sentence in the input stream.
class TreeError : public DataError {
 public:
  TreeError(size_t sentence, const std::string& what)
      : DataError("sentence " + std::to_string(sentence) + ": " + what),
        sentence_(sentence) {}
  size_t sentence() const { return sentence_; }

 private:
  size_t sentence_;
};

class LexiconError : public DataError {
 public:
  using DataError::DataError;
};

// A caller broke an operation's precondition.
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class PoolError : public DataError {
 public:
  using DataError::DataError;
};

class SamplingError : public DataError {
 public:
  using DataError::DataError;
};

// Bad encoder input: sequence too long or token id out of range.
class InputError : public DataError {
 public:
  using DataError::DataError;
};

// Non-finite value in a loss or gradient.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace eventbert

#endif  // EVENTBERT_ERRORS_H_
