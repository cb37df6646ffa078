// Reduces the modal walker at N = 3 in exact arithmetic and prints the table.
#include <iostream>

#include "slowvary/slowvary.hpp"

int main()
{
    using namespace slowvary;
    const auto fam = random_walker_modal();
    const auto split = spectral_split_exact(fam.base(), std::nullopt, 3);
    const auto result = construct_reduction(fam, split, 3);
    for (const auto& [n, a] : result.model.coeffs)
        std::cout << "A_(" << n.str() << ") = " << a(0, 0).str() << "\n";
    std::cout << "invariance residual " << check_invariance(fam, result.model, result.basis).max_residual << "\n";
}
