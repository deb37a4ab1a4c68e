// One PASS/FAIL line per acceptance criterion; exit 0 iff all pass.

#include "finstab/acceptance.hpp"

#include <iostream>
#include <string>

int main(int argc, char** argv) {
    const std::string filter = argc > 1 ? argv[1] : "*";
    const auto results = finstab::run_acceptance(filter);
    int failed = 0;
    for (const auto& r : results) {
        std::cout << finstab::format_result_line(r) << '\n';
        if (!r.passed) ++failed;
    }
    std::cout << results.size() - failed << '/' << results.size() << " criteria passed\n";
    return failed == 0 ? 0 : 1;
}
