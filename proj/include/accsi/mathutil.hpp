#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace accsi {

double norm_pdf(double x);
double norm_cdf(double x);
// inverse standard-normal CDF (Acklam's rational approximation, refined
// with one Halley step; |error| < 1e-13 on (0,1))
double norm_quantile(double p);

double mean(const std::vector<double>& v);
double stddev(const std::vector<double>& v);
// linear-interpolation percentile, q in [0,100]
double percentile(std::vector<double> v, double q);

// FNV-1a over a byte string, used for config/content hashes
std::uint64_t fnv1a64(const std::string& s);
std::string fnv1a64_hex(const std::string& s);

}  // namespace accsi
