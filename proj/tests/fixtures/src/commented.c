#include <stdio.h>

int main(void) {
  char buf[16] = {0};
  size_t n = fread(buf, 1, /* at most fifteen bytes of input */ 15, stdin);
  int acc = /* running sum of the first three bytes */ 0;
  for (size_t i = 0; i < 3 && i < n; i++)
    acc += /* signed char arithmetic on purpose */ buf[i];
  if (acc == 300)
    puts("sum");
  return 0;
}
