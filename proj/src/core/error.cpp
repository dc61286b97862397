#include "gradscan/error.hpp"

namespace gradscan {

void throw_io(const std::string& what) { throw Error(ErrorKind::io, what); }

void throw_invalid(const std::string& what) { throw Error(ErrorKind::validation, what); }

}  // namespace gradscan
