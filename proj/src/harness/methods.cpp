#include "ebd/harness/methods.hpp"

namespace ebd::harness {

namespace {
void append_nested(const std::exception& e, std::string& out) {
  try {
    std::rethrow_if_nested(e);
  } catch (const std::exception& inner) {
    const std::string msg = inner.what();
    if (out.find(msg) == std::string::npos) out += " <- " + msg;
    append_nested(inner, out);
  } catch (...) {
    out += " <- unknown error";
  }
}
}  // namespace

std::string describe_exception(const std::exception& e) {
  std::string out = e.what();
  append_nested(e, out);
  return out;
}

}  // namespace ebd::harness
