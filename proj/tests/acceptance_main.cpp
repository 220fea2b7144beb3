#include <cstdio>

#include "sl2lab/acceptance.hpp"

int main() {
  sl2lab::acceptance::Options opt;
  bool ok = true;
  sl2lab::acceptance::run_all(opt, [&](const sl2lab::acceptance::CriterionResult& r) {
    std::fputs(sl2lab::acceptance::table({r}).c_str(), stdout);
    std::fflush(stdout);
    ok = ok && r.pass;
  });
  return ok ? 0 : 1;
}
