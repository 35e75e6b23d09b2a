# Generated by Django 5.2.1 on 2026-10-17 09:12

from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = [
    ]

    operations = [
        migrations.CreateModel(
            name='ReportRecord',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('command', models.CharField(max_length=32)),
                ('parameters', models.JSONField(default=dict)),
                ('results', models.JSONField(null=True)),
                ('tool_version', models.CharField(max_length=32)),
                ('timestamp', models.CharField(max_length=64)),
                ('schema_version', models.PositiveIntegerField(default=1)),
                ('created_at', models.DateTimeField(auto_now_add=True)),
            ],
            options={
                'verbose_name': 'Report Record',
                'verbose_name_plural': 'Report Records',
                'db_table': 'report_records',
                'ordering': ['created_at', 'id'],
            },
        ),
    ]
