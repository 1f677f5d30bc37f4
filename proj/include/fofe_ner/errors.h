#ifndef FOFE_NER_ERRORS_H_
#define FOFE_NER_ERRORS_H_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fofe_ner {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define FOFE_NER_DEFINE_ERROR(Name)  \
  class Name : public Error {        \
   public:                           \
    using Error::Error;              \
  }

FOFE_NER_DEFINE_ERROR(InvalidArgument);
FOFE_NER_DEFINE_ERROR(MalformedCode);
FOFE_NER_DEFINE_ERROR(DimensionMismatch);
FOFE_NER_DEFINE_ERROR(FragmentTooShort);
FOFE_NER_DEFINE_ERROR(StaleCache);
FOFE_NER_DEFINE_ERROR(Diverged);
FOFE_NER_DEFINE_ERROR(EmptyPool);
FOFE_NER_DEFINE_ERROR(OverlappingGold);
FOFE_NER_DEFINE_ERROR(BadHeader);
FOFE_NER_DEFINE_ERROR(DuplicateToken);
FOFE_NER_DEFINE_ERROR(ConfigError);
FOFE_NER_DEFINE_ERROR(FormatError);

#undef FOFE_NER_DEFINE_ERROR

// Raised by the CoNLL reader; carries the 1-based line number.
class MalformedLine : public Error {
 public:
  MalformedLine(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

}  // namespace fofe_ner

#endif  // FOFE_NER_ERRORS_H_
