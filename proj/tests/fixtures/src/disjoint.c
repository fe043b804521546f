#include <stdio.h>

int main(void) {
  int a = getchar();
  int b = 7;
  int c = b * 2;
  puts("noise");
  int d = a + 1;
  if (d == 'r')
    return 1;
  return c;
}
