#include <stdio.h>

static int hex_digit(char c) {
  if (c >= '0' && c <= '9')
    return c - '0';
  if (c >= 'a' && c <= 'f')
    return c - 'a' + 10;
  if (c >= 'A' && c <= 'F')
    return c - 'A' + 10;
  return -1;
}

/* \uXXXX at p, or -1 */
static long parse_escape(const char *p) {
  if (p[0] != '\\' || p[1] != 'u')
    return -1;
  long v = 0;
  for (int i = 2; i < 6; i++) {
    int d = hex_digit(p[i]);
    if (d < 0)
      return -1;
    v = v * 16 + d;
  }
  return v;
}

int main(void) {
  char buf[64] = {0};
  size_t n = fread(buf, 1, sizeof(buf) - 1, stdin);
  if (n < 12)
    return 1;
  long hi = parse_escape(buf);
  if (hi < 0)
    return 2;
  if (hi == 0xD83D) {
    long lo = parse_escape(buf + 6);
    if (lo == 0xDE00) {
      puts("smile");
      return 0;
    }
    return 3;
  }
  return 4;
}
