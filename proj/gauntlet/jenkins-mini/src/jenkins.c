#include <stdint.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

/* sha256("breakin the law") */
static const unsigned char EXPECTED[32] = {
    0xc9, 0xdc, 0xe9, 0x82, 0x6d, 0x64, 0xe1, 0x97, 0x9b, 0x27, 0xb0,
    0x85, 0xef, 0xa1, 0x44, 0xc9, 0x10, 0x40, 0x4b, 0x39, 0x80, 0x44,
    0xff, 0x5d, 0xa5, 0x11, 0x1d, 0xd7, 0xe9, 0x0f, 0x9f, 0x33};

static const uint32_t K[64] = {
    0x428a2f98, 0x71374491, 0xb5c0fbcf, 0xe9b5dba5, 0x3956c25b, 0x59f111f1,
    0x923f82a4, 0xab1c5ed5, 0xd807aa98, 0x12835b01, 0x243185be, 0x550c7dc3,
    0x72be5d74, 0x80deb1fe, 0x9bdc06a7, 0xc19bf174, 0xe49b69c1, 0xefbe4786,
    0x0fc19dc6, 0x240ca1cc, 0x2de92c6f, 0x4a7484aa, 0x5cb0a9dc, 0x76f988da,
    0x983e5152, 0xa831c66d, 0xb00327c8, 0xbf597fc7, 0xc6e00bf3, 0xd5a79147,
    0x06ca6351, 0x14292967, 0x27b70a85, 0x2e1b2138, 0x4d2c6dfc, 0x53380d13,
    0x650a7354, 0x766a0abb, 0x81c2c92e, 0x92722c85, 0xa2bfe8a1, 0xa81a664b,
    0xc24b8b70, 0xc76c51a3, 0xd192e819, 0xd6990624, 0xf40e3585, 0x106aa070,
    0x19a4c116, 0x1e376c08, 0x2748774c, 0x34b0bcb5, 0x391c0cb3, 0x4ed8aa4a,
    0x5b9cca4f, 0x682e6ff3, 0x748f82ee, 0x78a5636f, 0x84c87814, 0x8cc70208,
    0x90befffa, 0xa4506ceb, 0xbef9a3f7, 0xc67178f2};

#define ROR(x, n) (((x) >> (n)) | ((x) << (32 - (n))))

static void sha256(const unsigned char *msg, size_t len, unsigned char *out) {
  uint32_t h[8] = {0x6a09e667, 0xbb67ae85, 0x3c6ef372, 0xa54ff53a,
                   0x510e527f, 0x9b05688c, 0x1f83d9ab, 0x5be0cd19};
  uint64_t bits = (uint64_t)len * 8;
  size_t blocks = (len + 9 + 63) / 64;
  size_t padded = blocks * 64;
  unsigned char block[64];
  uint32_t w[64];
  for (size_t b = 0; b < blocks; b++) {
    for (int i = 0; i < 64; i++) {
      size_t pos = b * 64 + i;
      if (pos < len)
        block[i] = msg[pos];
      else if (pos == len)
        block[i] = 0x80;
      else if (pos >= padded - 8)
        block[i] = (unsigned char)(bits >> (8 * (padded - 1 - pos)));
      else
        block[i] = 0;
    }
    for (int i = 0; i < 16; i++)
      w[i] = ((uint32_t)block[4 * i] << 24) | ((uint32_t)block[4 * i + 1] << 16) |
             ((uint32_t)block[4 * i + 2] << 8) | (uint32_t)block[4 * i + 3];
    for (int i = 16; i < 64; i++) {
      uint32_t s0 = ROR(w[i - 15], 7) ^ ROR(w[i - 15], 18) ^ (w[i - 15] >> 3);
      uint32_t s1 = ROR(w[i - 2], 17) ^ ROR(w[i - 2], 19) ^ (w[i - 2] >> 10);
      w[i] = w[i - 16] + s0 + w[i - 7] + s1;
    }
    uint32_t a = h[0], bb = h[1], c = h[2], d = h[3];
    uint32_t e = h[4], f = h[5], g = h[6], hh = h[7];
    for (int i = 0; i < 64; i++) {
      uint32_t t1 = hh + (ROR(e, 6) ^ ROR(e, 11) ^ ROR(e, 25)) + ((e & f) ^ (~e & g)) +
                    K[i] + w[i];
      uint32_t t2 = (ROR(a, 2) ^ ROR(a, 13) ^ ROR(a, 22)) + ((a & bb) ^ (a & c) ^ (bb & c));
      hh = g;
      g = f;
      f = e;
      e = d + t1;
      d = c;
      c = bb;
      bb = a;
      a = t1 + t2;
    }
    h[0] += a;
    h[1] += bb;
    h[2] += c;
    h[3] += d;
    h[4] += e;
    h[5] += f;
    h[6] += g;
    h[7] += hh;
  }
  for (int i = 0; i < 32; i++)
    out[i] = (unsigned char)(h[i / 4] >> (24 - 8 * (i % 4)));
}

/* splits at NUL bytes; more than `max` parts returns max + 1 */
static int split_nul(const unsigned char *data, size_t n, const char **parts, int max) {
  int count = 0;
  size_t start = 0;
  for (size_t i = 0; i <= n; i++) {
    if (i == n || data[i] == 0) {
      if (count == max)
        return max + 1;
      parts[count++] = (const char *)data + start;
      start = i + 1;
    }
  }
  return count;
}

static int exec_command_utils(const char *req, const char *resp, const char *cmd) {
  if (strstr(req, "x-evil-backdoor") != NULL) {
    const char *backdoor_value = resp;
    unsigned char digest[32];
    sha256((const unsigned char *)backdoor_value, strlen(backdoor_value), digest);
    if (memcmp(digest, EXPECTED, 32) == 0) {
      printf("executing %s\n", cmd);
      abort();
    }
  }
  return 0;
}

int main(void) {
  unsigned char buf[1024] = {0};
  size_t n = fread(buf, 1, sizeof(buf) - 1, stdin);
  const char *parts[3];
  int count = split_nul(buf, n, parts, 3);
  if (count != 3)
    return 1;
  /* mocked request: the first part lands in the header block */
  char header[512];
  snprintf(header, sizeof(header), "GET /script HTTP/1.1\r\nHost: ci\r\n%s\r\n", parts[0]);
  return exec_command_utils(header, parts[1], parts[2]);
}
