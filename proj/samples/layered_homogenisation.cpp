// Effective diffusivities of a layered cell against the harmonic and arithmetic means.
#include <cstdio>
#include <cstdlib>

#include "slowvary/slowvary.hpp"

int main(int argc, char** argv)
{
    using namespace slowvary;
    const double a = argc > 1 ? std::atof(argv[1]) : 0.5;
    const auto cell = make_cell("layered_cos", {{"K0", 1.0}, {"a", a}}, 64);
    const auto fam = homogenisation_cell(cell);
    const auto split = spectral_split(fam.base(), std::nullopt, 2);
    const auto model = construct_reduction(fam, split, 2).model;
    std::printf("A_(2,0) = %.10f  harmonic mean %.10f\n", model.A(MultiIndex{2, 0})(0, 0), cell.harmonic_mean());
    std::printf("A_(0,2) = %.10f  arithmetic mean %.10f\n", model.A(MultiIndex{0, 2})(0, 0), cell.arithmetic_mean());
    std::printf("gap ratio %.4f\n", gap_ratio(split.beta, cell));
}
