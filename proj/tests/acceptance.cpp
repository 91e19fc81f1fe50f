// Acceptance gate: `acceptance` runs every criterion, `acceptance N` runs one.
// Exit status is 0 only when every selected criterion passes.
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <string>

#include "phaselab/reproduce.hpp"

int main(int argc, char** argv) {
  namespace rep = phaselab::reproduce;
  const auto& all = rep::criteria();
  std::size_t first = 0, last = all.size();
  if (argc > 1) {
    const int id = std::atoi(argv[1]);
    if (id < 1 || id > static_cast<int>(all.size())) {
      std::fprintf(stderr, "usage: %s [1-%zu]\n", argv[0], all.size());
      return 2;
    }
    first = static_cast<std::size_t>(id - 1);
    last = first + 1;
  }
  bool ok = true;
  for (std::size_t i = first; i < last; ++i) {
    rep::Criterion c;
    try {
      c = all[i]();
    } catch (const std::exception& e) {
      c.id = static_cast<int>(i + 1);
      c.name = "criterion";
      c.detail = std::string("threw: ") + e.what();
    }
    std::printf("%s (%.2fs)\n", rep::format_row(c).c_str(), c.seconds);
    ok = ok && c.pass;
  }
  return ok ? 0 : 1;
}
