#include <iostream>

#include "openturb/acceptance.hpp"

int main() {
    const auto results = openturb::run_acceptance(std::cout);
    return openturb::all_passed(results) ? 0 : 1;
}
